#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "unitchart/errors.hpp"

namespace unitchart {

// Counter-based Philox4x32-10 generator. Cheap to construct, so every
// Monte-Carlo replication owns the substream (seed, stream): results are
// independent of scheduling and bit-identical for any worker count.
class Philox4x32 {
 public:
  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0) noexcept {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
  }

  std::uint32_t next_u32() noexcept {
    if (buf_pos_ >= 4) refill();
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on the open interval (0, 1): 53 random bits centered in the cell.
  double uniform01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller with a cached spare.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Gamma(shape, rate 1) via Marsaglia-Tsang squeeze; boosted for shape < 1.
  double gamma(double shape) noexcept {
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Beta(a, b) as a gamma ratio.
  double beta(double a, double b) noexcept {
    const double ga = gamma(a);
    const double gb = gamma(b);
    const double s = ga + gb;
    if (s <= 0.0) return 0.5;  // both shapes so small that both draws underflowed
    return ga / s;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  void refill() noexcept {
    std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    buf_ = {c0, c1, c2, c3};
    if (++ctr_[0] == 0) ++ctr_[1];  // 64-bit block counter; stream words stay put
    buf_pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

using RngStream = Philox4x32;

}  // namespace unitchart
