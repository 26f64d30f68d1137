#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "unitchart/errors.hpp"

namespace unitchart {

struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-12;
  int max_iter = 200;
};

struct Bracket {
  double lo;
  double hi;
};

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// Regularized incomplete beta function I_x(a, b).
double reg_inc_beta(double x, double a, double b);

// Inverse of reg_inc_beta in x: returns x with I_x(a, b) = p.
double inv_reg_inc_beta(double p, double a, double b);

// Regularized lower/upper incomplete gamma functions P(s, x), Q(s, x).
double reg_lower_gamma(double s, double x);
double reg_upper_gamma(double s, double x);

// Inverse of reg_upper_gamma in x: returns x with Q(s, x) = q.
double inv_reg_upper_gamma(double s, double q);

// e^x * Gamma(s, x) (unnormalized upper tail), evaluated without ever
// forming e^x or Gamma(s, x) separately, so it stays finite for x up to ~1e6.
double scaled_upper_gamma(double s, double x);

// Adaptive Gauss-Kronrod quadrature of f over [a, b]. Optional interior
// split points seed the initial panel set (useful to pin a sharp mode).
// Throws NumericError with the best estimate when the panel budget
// (tol.max_iter panel splits) is exhausted before reaching
// max(tol.abs, tol.rel * |result|).
double quad(const std::function<double(double)>& f, double a, double b,
            Tolerance tol = {1e-10, 1e-10, 2000},
            const std::vector<double>& split_points = {});

// Brent root finding on a sign-changing bracket. Deterministic.
double find_root(const std::function<double(double)>& f, Bracket bracket,
                 Tolerance tol = {1e-14, 4 * 2.220446049250313e-16, 200});

struct MinimizeResult {
  std::vector<double> argmin;
  double min = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Quasi-Newton (BFGS) minimization with central-difference gradients and a
// backtracking line search. tol.abs is the gradient sup-norm target.
MinimizeResult minimize(const std::function<double(const std::vector<double>&)>& f,
                        std::vector<double> x0, Tolerance tol = {1e-8, 0.0, 500});

// Central-difference gradient.
std::vector<double> numeric_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x);

// Symmetric matrix of central second differences. The per-coordinate step is
// max(step, 1e-4 * |x_i|).
std::vector<std::vector<double>> numeric_hessian(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double step = 1e-5);

namespace detail {

// 15-point Gauss-Kronrod rule on a single panel; the optional output is the
// embedded-rule error estimate. Header-inline so hot callers avoid
// std::function indirection.
struct GK15 {
  static constexpr std::array<double, 8> nodes = {
      0.0000000000000000e+00, 2.0778495500789847e-01, 4.0584515137739717e-01,
      5.8608723546769113e-01, 7.4153118559939444e-01, 8.6486442335976907e-01,
      9.4910791234275852e-01, 9.9145537112081264e-01};
  static constexpr std::array<double, 8> kronrod_w = {
      2.0948214108472783e-01, 2.0443294007529889e-01, 1.9035057806478541e-01,
      1.6900472663926790e-01, 1.4065325971552592e-01, 1.0479001032225018e-01,
      6.3092092629978553e-02, 2.2935322010529225e-02};
  // Gauss-7 weights aligned with the even-index Kronrod nodes.
  static constexpr std::array<double, 4> gauss_w = {
      4.1795918367346939e-01, 3.8183005050511894e-01, 2.7970539148927667e-01,
      1.2948496616886969e-01};
};

template <class F>
inline double gauss_kronrod_15(F&& f, double a, double b, double* err = nullptr) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = GK15::kronrod_w[0] * fc;
  double gauss = GK15::gauss_w[0] * fc;
  for (int i = 1; i < 8; ++i) {
    const double dx = h * GK15::nodes[i];
    const double fsum = f(c - dx) + f(c + dx);
    kron += GK15::kronrod_w[i] * fsum;
    if ((i & 1) == 0) gauss += GK15::gauss_w[i / 2] * fsum;
  }
  kron *= h;
  gauss *= h;
  if (err) {
    // QUADPACK-style sharpened estimate: (200d)^1.5 once d is small.
    const double diff = std::fabs(kron - gauss);
    const double sharp = std::pow(200.0 * diff, 1.5);
    *err = sharp < diff ? sharp : diff;
  }
  return kron;
}

}  // namespace detail
}  // namespace unitchart
