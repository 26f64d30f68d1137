#include "unitchart/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <sstream>

namespace unitchart {
namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = std::numeric_limits<double>::epsilon();

void require(bool ok, const char* msg) {
  if (!ok) throw DomainError(msg);
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 4.0 * kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge", h);
}

// Lower incomplete gamma by power series: returns P(s, x) for x < s + 1.
double lower_gamma_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int k = 1; k <= 2000; ++k) {
    term *= x / (s + k);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
  }
  throw NumericError("incomplete gamma series did not converge", sum);
}

// Continued fraction for the upper tail: returns H with
// Gamma(s, x) = exp(-x + s ln x) * H, valid for x >= s + 1.
double upper_gamma_cf(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 2000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 4.0 * kEps) return h;
  }
  throw NumericError("incomplete gamma continued fraction did not converge", h);
}

}  // namespace

double log_gamma(double x) {
  require(std::isfinite(x) && x > 0.0, "log_gamma: x must be positive and finite");
  return std::lgamma(x);
}

double reg_inc_beta(double x, double a, double b) {
  require(std::isfinite(x) && x >= 0.0 && x <= 1.0, "reg_inc_beta: x must lie in [0,1]");
  require(std::isfinite(a) && a > 0.0 && std::isfinite(b) && b > 0.0,
          "reg_inc_beta: a and b must be positive");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta);
  double result;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    result = front * beta_cf(x, a, b) / a;
  } else {
    result = 1.0 - front * beta_cf(1.0 - x, b, a) / b;
  }
  return std::clamp(result, 0.0, 1.0);
}

double inv_reg_inc_beta(double p, double a, double b) {
  require(std::isfinite(p) && p > 0.0 && p < 1.0, "inv_reg_inc_beta: p must lie in (0,1)");
  require(std::isfinite(a) && a > 0.0 && std::isfinite(b) && b > 0.0,
          "inv_reg_inc_beta: a and b must be positive");
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  double lo = 0.0, hi = 1.0;
  double x = a / (a + b);  // start at the mean
  double f = reg_inc_beta(x, a, b) - p;
  if (f > 0.0) hi = x; else lo = x;
  for (int it = 0; it < 200; ++it) {
    if (std::fabs(f) < 1e-14 || hi - lo < 4.0 * kEps * x) return x;
    const double logpdf =
        (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
    double step = -f * std::exp(-logpdf);
    double xn = x + step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection safeguard
    x = xn;
    f = reg_inc_beta(x, a, b) - p;
    if (f > 0.0) hi = x; else lo = x;
  }
  throw NumericError("inv_reg_inc_beta did not converge", x, std::fabs(f));
}

double reg_lower_gamma(double s, double x) {
  require(std::isfinite(s) && s > 0.0, "reg_lower_gamma: s must be positive");
  require(std::isfinite(x) && x >= 0.0, "reg_lower_gamma: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) return std::clamp(lower_gamma_series(s, x), 0.0, 1.0);
  const double q =
      std::exp(-x + s * std::log(x) - std::lgamma(s)) * upper_gamma_cf(s, x);
  return std::clamp(1.0 - q, 0.0, 1.0);
}

double reg_upper_gamma(double s, double x) {
  require(std::isfinite(s) && s > 0.0, "reg_upper_gamma: s must be positive");
  require(std::isfinite(x) && x >= 0.0, "reg_upper_gamma: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return std::clamp(1.0 - lower_gamma_series(s, x), 0.0, 1.0);
  const double q =
      std::exp(-x + s * std::log(x) - std::lgamma(s)) * upper_gamma_cf(s, x);
  return std::clamp(q, 0.0, 1.0);
}

double inv_reg_upper_gamma(double s, double q) {
  require(std::isfinite(q) && q > 0.0 && q < 1.0, "inv_reg_upper_gamma: q must lie in (0,1)");
  require(std::isfinite(s) && s > 0.0, "inv_reg_upper_gamma: s must be positive");
  // Bracket by doubling around the mean, then hand off to Brent.
  double hi = std::max(2.0 * s, 1.0);
  for (int i = 0; i < 200 && reg_upper_gamma(s, hi) > q; ++i) hi *= 2.0;
  const auto f = [&](double x) { return reg_upper_gamma(s, x) - q; };
  return find_root(f, Bracket{0.0, hi}, Tolerance{1e-15, 4.0 * kEps, 300});
}

double scaled_upper_gamma(double s, double x) {
  require(std::isfinite(s) && s > 0.0, "scaled_upper_gamma: s must be positive");
  require(std::isfinite(x) && x > 0.0, "scaled_upper_gamma: x must be positive");
  if (x >= s + 1.0) {
    // Gamma(s,x) = exp(-x + s ln x) * H, so e^x Gamma(s,x) = exp(s ln x) * H.
    const double h = upper_gamma_cf(s, x);
    return std::exp(s * std::log(x) + std::log(h));
  }
  // Small x: the upper tail is O(1), so e^x and Gamma(s) are both benign.
  const double q = 1.0 - lower_gamma_series(s, x);
  return std::exp(x + std::lgamma(s) + std::log(q));
}

double quad(const std::function<double(double)>& f, double a, double b,
            Tolerance tol, const std::vector<double>& split_points) {
  require(std::isfinite(a) && std::isfinite(b), "quad: endpoints must be finite");
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  struct Panel {
    double err, a, b, value;
    std::uint64_t id;  // insertion order; makes the refinement deterministic
    bool operator<(const Panel& o) const {
      if (err != o.err) return err > o.err;  // largest error first
      return id < o.id;
    }
  };

  std::vector<double> edges{a};
  for (double s : split_points) {
    if (s > a && s < b) edges.push_back(s);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());

  std::multiset<Panel> panels;
  std::uint64_t next_id = 0;
  double total = 0.0, total_err = 0.0;
  auto push = [&](double lo, double hi) {
    double e = 0.0;
    const double v = detail::gauss_kronrod_15(f, lo, hi, &e);
    if (!std::isfinite(v)) {
      throw NumericError("quad: integrand produced a non-finite value", total, total_err);
    }
    panels.insert(Panel{e, lo, hi, v, next_id++});
    total += v;
    total_err += e;
  };
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) push(edges[i], edges[i + 1]);

  int splits = 0;
  while (total_err > std::max(tol.abs, tol.rel * std::fabs(total))) {
    if (splits >= tol.max_iter || panels.empty()) {
      throw NumericError("quad: panel budget exhausted before reaching tolerance",
                         sign * total, total_err);
    }
    const Panel worst = *panels.begin();
    panels.erase(panels.begin());
    total -= worst.value;
    total_err -= worst.err;
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval at machine resolution; keep its estimate and stop refining it.
      total += worst.value;
      continue;
    }
    push(worst.a, mid);
    push(mid, worst.b);
    ++splits;
  }
  return sign * total;
}

double find_root(const std::function<double(double)>& f, Bracket bracket,
                 Tolerance tol) {
  double a = bracket.lo, b = bracket.hi;
  require(std::isfinite(a) && std::isfinite(b) && a < b,
          "find_root: bracket must satisfy lo < hi");
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  require(std::signbit(fa) != std::signbit(fb),
          "find_root: f must change sign over the bracket");

  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < tol.max_iter; ++iter) {
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::fabs(b) + 0.5 * tol.abs;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
      const double min2 = std::fabs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    if (std::fabs(d) > tol1) {
      b += d;
    } else {
      b += (xm > 0.0 ? tol1 : -tol1);
    }
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      e = d = b - a;
    }
  }
  throw NumericError("find_root: no convergence within max_iter", b, std::fabs(fb));
}

std::vector<double> numeric_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> g(n), xp = x;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 6.0554544523933429e-06 * std::max(1.0, std::fabs(x[i]));
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

MinimizeResult minimize(const std::function<double(const std::vector<double>&)>& f,
                        std::vector<double> x0, Tolerance tol) {
  const std::size_t n = x0.size();
  require(n > 0, "minimize: empty starting point");

  std::vector<double> x = std::move(x0);
  double fx = f(x);
  if (!std::isfinite(fx)) throw DomainError("minimize: f(x0) is not finite");
  std::vector<double> g = numeric_gradient(f, x);

  // Inverse-Hessian approximation, dense row-major.
  std::vector<double> H(n * n, 0.0);
  auto reset_h = [&] {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
  };
  reset_h();

  auto sup_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::fabs(a));
    return m;
  };

  MinimizeResult res;
  std::vector<double> p(n), xn(n), gn(n), s(n), y(n), hy(n);
  bool fresh_reset = true;
  int stalled = 0;
  int iter = 0;
  for (; iter < tol.max_iter; ++iter) {
    const double gnorm = sup_norm(g);
    if (gnorm <= tol.abs) {
      res.converged = true;
      break;
    }
    // p = -H g
    double gp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += H[i * n + j] * g[j];
      p[i] = -acc;
    }
    for (std::size_t i = 0; i < n; ++i) gp += g[i] * p[i];
    if (gp >= 0.0) {  // not a descent direction: restart from steepest descent
      reset_h();
      for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
      gp = 0.0;
      for (std::size_t i = 0; i < n; ++i) gp += g[i] * p[i];
      fresh_reset = true;
    }

    // Backtracking Armijo line search.
    double t = 1.0;
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + t * p[i];
      fn = f(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * t * gp) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!fresh_reset) {  // retry once from a steepest-descent restart
        reset_h();
        fresh_reset = true;
        continue;
      }
      // Stuck at line-search resolution. Accept if the gradient is already
      // small on the caller's scale, otherwise report non-convergence.
      if (gnorm <= std::max(100.0 * tol.abs, 1e-6)) {
        res.converged = true;
        break;
      }
      throw NumericError("minimize: line search failed to make progress", fx, gnorm);
    }

    // Objective changes at rounding scale mean the quadratic model has
    // bottomed out; insisting on the nominal gradient target past that point
    // only burns iterations against difference noise.
    if (std::fabs(fn - fx) <= 1e-14 * (1.0 + std::fabs(fx))) {
      ++stalled;
    } else {
      stalled = 0;
    }
    gn = numeric_gradient(f, xn);
    double sy = 0.0;
    double ss = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
      sy += s[i] * y[i];
      ss += s[i] * s[i];
      yy += y[i] * y[i];
    }
    x = xn;
    fx = fn;
    g = gn;
    fresh_reset = false;
    if (stalled >= 3) {
      if (sup_norm(g) <= std::max(100.0 * tol.abs, 1e-6)) {
        res.converged = true;
        break;
      }
      throw NumericError("minimize: stalled before reaching the gradient target",
                         fx, sup_norm(g));
    }
    if (sy > 1e-10 * std::sqrt(ss * yy)) {
      // H <- (I - s y^T / sy) H (I - y s^T / sy) + s s^T / sy
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += H[i * n + j] * y[j];
        hy[i] = acc;
      }
      double yhy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
      const double r = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += -r * (s[i] * hy[j] + hy[i] * s[j]) +
                          r * (1.0 + yhy * r) * s[i] * s[j];
        }
      }
    }
  }

  res.argmin = x;
  res.min = fx;
  res.iterations = iter;
  res.grad_norm = sup_norm(g);
  if (!res.converged) {
    if (res.grad_norm <= tol.abs) {
      res.converged = true;
    } else {
      std::ostringstream os;
      os << "minimize: no convergence in " << tol.max_iter
         << " iterations (|grad| = " << res.grad_norm << ")";
      throw NumericError(os.str(), fx, res.grad_norm);
    }
  }
  return res;
}

std::vector<std::vector<double>> numeric_hessian(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double step) {
  const std::size_t n = x.size();
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = std::max(step, 1e-4 * std::fabs(x[i]));
  }
  std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
  std::vector<double> xp = x;
  const double f0 = f(x);
  for (std::size_t i = 0; i < n; ++i) {
    xp[i] = x[i] + h[i];
    const double fp = f(xp);
    xp[i] = x[i] - h[i];
    const double fm = f(xp);
    xp[i] = x[i];
    H[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      xp[i] = x[i] + h[i]; xp[j] = x[j] + h[j];
      const double fpp = f(xp);
      xp[j] = x[j] - h[j];
      const double fpm = f(xp);
      xp[i] = x[i] - h[i]; xp[j] = x[j] + h[j];
      const double fmp = f(xp);
      xp[j] = x[j] - h[j];
      const double fmm = f(xp);
      xp[i] = x[i]; xp[j] = x[j];
      H[i][j] = H[j][i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(H[i][j])) {
        throw NumericError("numeric_hessian: non-finite entry");
      }
    }
  }
  return H;
}

}  // namespace unitchart
