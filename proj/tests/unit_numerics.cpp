#include <cmath>
#include <vector>

#include "doctest.h"
#include "unitchart/errors.hpp"
#include "unitchart/numerics.hpp"

namespace nm = unitchart;
using unitchart::DomainError;

TEST_CASE("log_gamma matches tabulated values") {
  CHECK(nm::log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(nm::log_gamma(2.0) == doctest::Approx(0.0).epsilon(1e-14));
  // ln Gamma(1/2) = ln sqrt(pi)
  CHECK(nm::log_gamma(0.5) ==
        doctest::Approx(0.57236494292470008707).epsilon(1e-14));
  // ln Gamma(10) = ln 9!
  CHECK(nm::log_gamma(10.0) ==
        doctest::Approx(12.801827480081469611).epsilon(1e-14));
  // Recurrence Gamma(x+1) = x Gamma(x) in log form.
  for (double x : {0.3, 1.7, 8.25, 41.0}) {
    CHECK(nm::log_gamma(x + 1.0) - nm::log_gamma(x) ==
          doctest::Approx(std::log(x)).epsilon(1e-13));
  }
}

TEST_CASE("regularized incomplete beta: closed forms and symmetry") {
  // I_x(2,3) = 6x^2 - 8x^3 + 3x^4, exactly 0.26171875 at x = 1/4.
  CHECK(nm::reg_inc_beta(0.25, 2.0, 3.0) ==
        doctest::Approx(0.26171875).epsilon(1e-13));
  CHECK(nm::reg_inc_beta(0.3, 5.0, 2.0) ==
        doctest::Approx(0.010935).epsilon(1e-12));
  CHECK(nm::reg_inc_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(nm::reg_inc_beta(1.0, 2.0, 3.0) == 1.0);
  for (double x : {0.05, 0.2, 0.5, 0.77, 0.99}) {
    for (double a : {0.4, 3.0, 58.0}) {
      for (double b : {1.5, 12.0, 232.0}) {
        CHECK(nm::reg_inc_beta(x, a, b) ==
              doctest::Approx(1.0 - nm::reg_inc_beta(1.0 - x, b, a))
                  .epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("inverse incomplete beta round trips") {
  for (double p : {0.00135, 0.01, 0.3, 0.5, 0.9, 0.99865}) {
    const double x = nm::inv_reg_inc_beta(p, 58.0, 232.0);
    CHECK(nm::reg_inc_beta(x, 58.0, 232.0) == doctest::Approx(p).epsilon(1e-10));
  }
  for (double x : {0.02, 0.2, 0.65, 0.98}) {
    const double p = nm::reg_inc_beta(x, 2.5, 0.8);
    CHECK(nm::inv_reg_inc_beta(p, 2.5, 0.8) == doctest::Approx(x).epsilon(1e-10));
  }
}

TEST_CASE("regularized incomplete gamma: identities and tabulated values") {
  // P(1, x) = 1 - exp(-x).
  for (double x : {0.1, 1.0, 4.5, 20.0}) {
    CHECK(nm::reg_lower_gamma(1.0, x) ==
          doctest::Approx(-std::expm1(-x)).epsilon(1e-13));
    CHECK(nm::reg_lower_gamma(2.5, x) + nm::reg_upper_gamma(2.5, x) ==
          doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK(nm::reg_upper_gamma(2.5, 3.0) ==
        doctest::Approx(0.30621891841327840088).epsilon(1e-12));
  CHECK(nm::reg_lower_gamma(2.5, 3.0) ==
        doctest::Approx(0.69378108158672159912).epsilon(1e-12));
  // Q(s+1, x) = Q(s, x) + x^s e^{-x} / Gamma(s+1).
  for (double s : {0.5, 2.5, 17.0}) {
    for (double x : {0.8, 3.0, 25.0}) {
      const double step =
          std::exp(s * std::log(x) - x - nm::log_gamma(s + 1.0));
      CHECK(nm::reg_upper_gamma(s + 1.0, x) ==
            doctest::Approx(nm::reg_upper_gamma(s, x) + step).epsilon(1e-12));
    }
  }
}

TEST_CASE("inverse upper incomplete gamma round trips") {
  for (double q : {0.00135, 0.1, 0.5, 0.9, 0.99865}) {
    for (double s : {0.5, 2.2798, 96.0}) {
      const double x = nm::inv_reg_upper_gamma(s, q);
      CHECK(nm::reg_upper_gamma(s, x) == doctest::Approx(q).epsilon(1e-10));
    }
  }
}

TEST_CASE("scaled upper incomplete gamma") {
  // e^x Gamma(1, x) = 1 identically.
  for (double x : {0.5, 10.0, 500.0, 2.0e5}) {
    CHECK(nm::scaled_upper_gamma(1.0, x) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(nm::scaled_upper_gamma(0.5, 2.0) ==
        doctest::Approx(0.59590607882586501379).epsilon(1e-12));
  // Agreement with e^x Gamma(s) Q(s, x) where that product is representable.
  for (double s : {0.5, 3.0}) {
    for (double x : {0.25, 4.0, 30.0}) {
      const double direct = std::exp(x + nm::log_gamma(s)) *
                            nm::reg_upper_gamma(s, x);
      CHECK(nm::scaled_upper_gamma(s, x) == doctest::Approx(direct).epsilon(1e-11));
    }
  }
  // Tail where the unscaled form would overflow: value ~ Gamma(s) x^{s-1}.
  const double far = nm::scaled_upper_gamma(0.5, 1.0e6);
  CHECK(std::isfinite(far));
  CHECK(far == doctest::Approx(std::exp(nm::log_gamma(0.5)) *
                               std::pow(1.0e6, -0.5)).epsilon(1e-3));
}

TEST_CASE("adaptive quadrature") {
  auto sq = [](double x) { return x * x; };
  CHECK(nm::quad(sq, 0.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  auto s = [](double x) { return std::sin(x); };
  CHECK(nm::quad(s, 0.0, 3.14159265358979323846) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // Narrow Gaussian spike, resolved via a split point at its centre.
  auto spike = [](double x) {
    const double z = (x - 0.3) / 1.0e-3;
    return std::exp(-0.5 * z * z);
  };
  CHECK(nm::quad(spike, 0.0, 1.0, {1e-10, 1e-10, 2000}, {0.3}) ==
        doctest::Approx(0.0025066282746310005).epsilon(1e-6));
  // Reversed limits flip the sign.
  CHECK(nm::quad(sq, 1.0, 0.0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("root finding") {
  auto f = [](double x) { return std::cos(x) - x; };
  CHECK(nm::find_root(f, {0.0, 1.0}) ==
        doctest::Approx(0.73908513321516064166).epsilon(1e-14));
  // Bracket endpoints with the same sign are rejected.
  CHECK_THROWS_AS(nm::find_root(f, {2.0, 3.0}), DomainError);
}

TEST_CASE("BFGS minimization solves Rosenbrock") {
  auto rosen = [](const std::vector<double>& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  };
  const auto res = nm::minimize(rosen, {-1.2, 1.0});
  CHECK(res.converged);
  CHECK(res.argmin[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.argmin[1] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.min == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(res.iterations > 1);

  auto bad = [](const std::vector<double>& x) {
    return std::log(x[0]);  // -inf at the start point below
  };
  CHECK_THROWS_AS(nm::minimize(bad, {0.0}), DomainError);
}

TEST_CASE("numeric derivatives of a quadratic") {
  auto f = [](const std::vector<double>& x) {
    return x[0] * x[0] + 3.0 * x[0] * x[1];
  };
  const auto g = nm::numeric_gradient(f, {1.0, 2.0});
  CHECK(g[0] == doctest::Approx(8.0).epsilon(1e-7));
  CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-7));
  const auto h = nm::numeric_hessian(f, {1.0, 2.0});
  CHECK(h[0][0] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(h[0][1] == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(h[1][0] == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(h[1][1] == doctest::Approx(0.0).epsilon(1e-5));
}
