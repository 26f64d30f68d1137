#include "unitchart/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "unitchart/numerics.hpp"

namespace unitchart {
namespace {

constexpr double kOpenMargin = 2.220446049250313e-16;

double clamp_open(double x) {
  return std::clamp(x, kOpenMargin, 1.0 - kOpenMargin);
}

void check_unit_interval_param(double mu) {
  if (!(std::isfinite(mu) && mu > 0.0 && mu < 1.0)) {
    throw DomainError("model mean must lie strictly inside (0,1)");
  }
}

void check_positive_param(double d, const char* what) {
  if (!(std::isfinite(d) && d > 0.0)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

namespace detail {

struct SimplexGrid {
  static constexpr int kKnots = 2048;
  std::vector<double> x;    // abscissae, x[0] = 0, x.back() = 1
  std::vector<double> cdf;  // accumulated mass up to each knot
  std::vector<double> pdf;  // density at each knot (0 at the endpoints)
};

namespace {

// Simplex density from raw constants; deviance d(x; mu) written so that the
// x -> 0 / x -> 1 overflow path cleanly produces exp(-inf) = 0.
inline double simplex_pdf_raw(double x, double mu, double inv_mu_sq,
                              double half_inv_sigma_sq, double log_norm) {
  const double g = x * (1.0 - x);
  const double dev = (x - mu) * (x - mu) / g * inv_mu_sq;
  const double lp = log_norm - 1.5 * std::log(g) - half_inv_sigma_sq * dev;
  return std::exp(lp);
}

}  // namespace

std::shared_ptr<const SimplexGrid> build_simplex_grid(double mu, double inv_mu_sq,
                                                      double half_inv_sigma_sq,
                                                      double log_norm) {
  auto grid = std::make_shared<SimplexGrid>();
  const int knots = SimplexGrid::kKnots;
  const int panels = knots - 1;
  grid->x.resize(knots);
  grid->cdf.resize(knots);
  grid->pdf.resize(knots);

  // sin^2 warp: knots crowd toward both endpoints, where the density's
  // (x(1-x))^{-3/2} factor varies fastest.
  for (int i = 0; i < knots; ++i) {
    const double s = std::sin(0.5 * std::numbers::pi * i / panels);
    grid->x[i] = s * s;
  }
  grid->x[0] = 0.0;
  grid->x[panels] = 1.0;

  const auto f = [&](double x) {
    return simplex_pdf_raw(x, mu, inv_mu_sq, half_inv_sigma_sq, log_norm);
  };
  grid->pdf[0] = 0.0;
  grid->pdf[panels] = 0.0;
  for (int i = 1; i < panels; ++i) grid->pdf[i] = f(grid->x[i]);

  grid->cdf[0] = 0.0;
  for (int i = 0; i < panels; ++i) {
    grid->cdf[i + 1] =
        grid->cdf[i] + gauss_kronrod_15(f, grid->x[i], grid->x[i + 1]);
  }
  if (std::fabs(grid->cdf[panels] - 1.0) > 1e-8) {
    throw NumericError("simplex grid failed to integrate to one",
                       grid->cdf[panels]);
  }
  return grid;
}

namespace {

// Locate the panel containing x (by abscissa).
inline int panel_of_x(const SimplexGrid& g, double x) {
  const auto it = std::upper_bound(g.x.begin(), g.x.end(), x);
  int k = static_cast<int>(it - g.x.begin()) - 1;
  return std::clamp(k, 0, SimplexGrid::kKnots - 2);
}

// Locate the panel containing cumulative mass u.
inline int panel_of_u(const SimplexGrid& g, double u) {
  const auto it = std::upper_bound(g.cdf.begin(), g.cdf.end(), u);
  int k = static_cast<int>(it - g.cdf.begin()) - 1;
  return std::clamp(k, 0, SimplexGrid::kKnots - 2);
}

// Cubic-Hermite seed for the inverse cdf inside panel k, slopes clamped for
// monotonicity (Fritsch-Carlson).
inline double hermite_inverse_seed(const SimplexGrid& g, int k, double u) {
  const double du = g.cdf[k + 1] - g.cdf[k];
  const double dx = g.x[k + 1] - g.x[k];
  if (!(du > 0.0)) return g.x[k] + 0.5 * dx;
  const double s = std::clamp((u - g.cdf[k]) / du, 0.0, 1.0);
  const double m0 = g.pdf[k] > 0.0 ? std::min(du / (g.pdf[k] * dx), 3.0) : 3.0;
  const double m1 =
      g.pdf[k + 1] > 0.0 ? std::min(du / (g.pdf[k + 1] * dx), 3.0) : 3.0;
  const double s2 = s * s;
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s2 * (3.0 - 2.0 * s);
  const double h11 = s2 * (s - 1.0);
  return g.x[k] + dx * (h10 * m0 + h01 + h11 * m1);
}

// Cubic-Hermite forward cdf interpolant inside panel k.
inline double hermite_forward_cdf(const SimplexGrid& g, int k, double x) {
  const double du = g.cdf[k + 1] - g.cdf[k];
  const double dx = g.x[k + 1] - g.x[k];
  const double s = std::clamp((x - g.x[k]) / dx, 0.0, 1.0);
  if (!(du > 0.0)) return g.cdf[k];
  const double m0 = std::min(g.pdf[k] * dx / du, 3.0);
  const double m1 = std::min(g.pdf[k + 1] * dx / du, 3.0);
  const double s2 = s * s;
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s2 * (3.0 - 2.0 * s);
  const double h11 = s2 * (s - 1.0);
  return g.cdf[k] + du * (h10 * m0 + h01 + h11 * m1);
}

}  // namespace
}  // namespace detail

std::string_view family_name(Family family) {
  switch (family) {
    case Family::beta: return "beta";
    case Family::simplex: return "simplex";
    case Family::unit_gamma: return "unitgamma";
  }
  return "unknown";
}

Family family_from_name(std::string_view name) {
  if (name == "beta") return Family::beta;
  if (name == "simplex") return Family::simplex;
  if (name == "unitgamma" || name == "unit_gamma" || name == "unit-gamma") {
    return Family::unit_gamma;
  }
  throw DomainError("unknown family name: " + std::string(name));
}

UnitModel::UnitModel(Family family, double mu, double dispersion)
    : family_(family), mu_(mu), disp_(dispersion) {
  check_unit_interval_param(mu);
  switch (family_) {
    case Family::beta: {
      check_positive_param(dispersion, "beta precision phi");
      a_ = mu * dispersion;
      b_ = (1.0 - mu) * dispersion;
      log_norm_ = std::lgamma(dispersion) - std::lgamma(a_) - std::lgamma(b_);
      break;
    }
    case Family::simplex: {
      check_positive_param(dispersion, "simplex dispersion sigma");
      a_ = 1.0 / (mu * mu * (1.0 - mu) * (1.0 - mu));
      b_ = 0.5 / (dispersion * dispersion);
      log_norm_ = -0.5 * (std::log(2.0 * std::numbers::pi) +
                          2.0 * std::log(dispersion));
      grid_ = detail::build_simplex_grid(mu, a_, b_, log_norm_);
      break;
    }
    case Family::unit_gamma: {
      check_positive_param(dispersion, "unit gamma shape tau");
      const double log_m = std::log(mu) / dispersion;
      a_ = std::exp(log_m) / (-std::expm1(log_m));  // theta
      log_norm_ = dispersion * std::log(a_) - std::lgamma(dispersion);
      break;
    }
  }
}

UnitModel UnitModel::beta(double mu, double phi) {
  return UnitModel(Family::beta, mu, phi);
}
UnitModel UnitModel::simplex(double mu, double sigma) {
  return UnitModel(Family::simplex, mu, sigma);
}
UnitModel UnitModel::unit_gamma(double mu, double tau) {
  return UnitModel(Family::unit_gamma, mu, tau);
}
UnitModel UnitModel::make(Family family, double mu, double dispersion) {
  return UnitModel(family, mu, dispersion);
}

double UnitModel::variance() const {
  switch (family_) {
    case Family::beta:
      return mu_ * (1.0 - mu_) / (disp_ + 1.0);
    case Family::simplex: {
      const double c = a_ * b_;
      return mu_ * (1.0 - mu_) -
             std::sqrt(b_) * scaled_upper_gamma(0.5, c);
    }
    case Family::unit_gamma: {
      const double ex2 =
          std::exp(disp_ * (std::log(a_) - std::log(a_ + 2.0)));
      return ex2 - mu_ * mu_;
    }
  }
  return 0.0;
}

double UnitModel::std_dev() const { return std::sqrt(variance()); }

double UnitModel::log_pdf(double x) const {
  if (!(std::isfinite(x) && x > 0.0 && x < 1.0)) {
    throw DomainError("pdf: x must lie strictly inside (0,1)");
  }
  switch (family_) {
    case Family::beta:
      return log_norm_ + (a_ - 1.0) * std::log(x) + (b_ - 1.0) * std::log1p(-x);
    case Family::simplex: {
      const double g = x * (1.0 - x);
      const double dev = (x - mu_) * (x - mu_) / g * a_;
      return log_norm_ - 1.5 * std::log(g) - b_ * dev;
    }
    case Family::unit_gamma:
      return log_norm_ + (a_ - 1.0) * std::log(x) +
             (disp_ - 1.0) * std::log(-std::log(x));
  }
  return 0.0;
}

double UnitModel::pdf(double x) const { return std::exp(log_pdf(x)); }

double UnitModel::cdf(double x) const {
  if (!(std::isfinite(x) && x >= 0.0 && x <= 1.0)) {
    throw DomainError("cdf: x must lie in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  switch (family_) {
    case Family::beta:
      return reg_inc_beta(x, a_, b_);
    case Family::simplex: {
      const detail::SimplexGrid& g = *grid_;
      const int k = detail::panel_of_x(g, x);
      const auto f = [&](double t) {
        return detail::simplex_pdf_raw(t, mu_, a_, b_, log_norm_);
      };
      const double v = g.cdf[k] + detail::gauss_kronrod_15(f, g.x[k], x);
      return std::clamp(v, 0.0, 1.0);
    }
    case Family::unit_gamma:
      return reg_upper_gamma(disp_, a_ * (-std::log(x)));
  }
  return 0.0;
}

double UnitModel::quantile(double p) const {
  if (!(std::isfinite(p) && p > 0.0 && p < 1.0)) {
    throw DomainError("quantile: p must lie strictly inside (0,1)");
  }
  switch (family_) {
    case Family::beta:
      return inv_reg_inc_beta(p, a_, b_);
    case Family::simplex: {
      const detail::SimplexGrid& g = *grid_;
      const int k = detail::panel_of_u(g, p);
      const auto f = [&](double t) {
        return detail::simplex_pdf_raw(t, mu_, a_, b_, log_norm_);
      };
      double lo = g.x[k], hi = g.x[k + 1];
      double x = detail::hermite_inverse_seed(g, k, p);
      for (int it = 0; it < 80; ++it) {
        const double fx = g.cdf[k] + detail::gauss_kronrod_15(f, g.x[k], x);
        const double err = fx - p;
        if (std::fabs(err) < 1e-13 || hi - lo < 1e-16) break;
        if (err > 0.0) hi = x; else lo = x;
        const double dens = f(x);
        double xn = dens > 0.0 ? x - err / dens : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        x = xn;
      }
      return clamp_open(x);
    }
    case Family::unit_gamma: {
      const double y = inv_reg_upper_gamma(disp_, p);
      return clamp_open(std::exp(-y / a_));
    }
  }
  return 0.0;
}

MomentReport UnitModel::moment_report() const {
  MomentReport r;
  r.mean = mu_;
  r.variance = variance();
  r.std_dev = std::sqrt(r.variance);
  r.cv = r.std_dev / r.mean;
  switch (family_) {
    case Family::beta: {
      const double s = a_ + b_;  // = phi
      r.skewness = 2.0 * (b_ - a_) * std::sqrt(s + 1.0) /
                   ((s + 2.0) * std::sqrt(a_ * b_));
      const double ex_kurt =
          6.0 * ((a_ - b_) * (a_ - b_) * (s + 1.0) - a_ * b_ * (s + 2.0)) /
          (a_ * b_ * (s + 2.0) * (s + 3.0));
      r.ex_kurtosis_plus3 = ex_kurt + 3.0;
      break;
    }
    case Family::unit_gamma: {
      const auto raw = [&](int k) {
        return std::exp(disp_ * (std::log(a_) - std::log(a_ + k)));
      };
      const double e2 = raw(2), e3 = raw(3), e4 = raw(4);
      const double m = mu_;
      const double m2 = e2 - m * m;
      const double m3 = e3 - 3.0 * m * e2 + 2.0 * m * m * m;
      const double m4 = e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m * m * m * m;
      r.skewness = m3 / std::pow(m2, 1.5);
      r.ex_kurtosis_plus3 = m4 / (m2 * m2);
      break;
    }
    case Family::simplex: {
      const auto central = [&](int k) {
        const auto f = [&](double x) {
          return std::pow(x - mu_, k) *
                 detail::simplex_pdf_raw(x, mu_, a_, b_, log_norm_);
        };
        return quad(f, 0.0, 1.0, Tolerance{1e-13, 1e-11, 4000}, {mu_});
      };
      const double m2 = central(2);
      const double m3 = central(3);
      const double m4 = central(4);
      r.skewness = m3 / std::pow(m2, 1.5);
      r.ex_kurtosis_plus3 = m4 / (m2 * m2);
      break;
    }
  }
  return r;
}

double UnitModel::sample(RngStream& stream) const {
  switch (family_) {
    case Family::beta:
      return clamp_open(stream.beta(a_, b_));
    case Family::unit_gamma:
      return clamp_open(std::exp(-stream.gamma(disp_) / a_));
    case Family::simplex: {
      const detail::SimplexGrid& g = *grid_;
      double u = stream.uniform01();
      if (u >= g.cdf.back()) return clamp_open(1.0);
      const int k = detail::panel_of_u(g, u);
      double x = detail::hermite_inverse_seed(g, k, u);
      // Two guarded Newton polish steps against the Hermite cdf interpolant,
      // using the exact density as the derivative.
      for (int it = 0; it < 2; ++it) {
        const double dens =
            detail::simplex_pdf_raw(x, mu_, a_, b_, log_norm_);
        if (!(dens > 0.0)) break;
        const double err = detail::hermite_forward_cdf(g, k, x) - u;
        x = std::clamp(x - err / dens, g.x[k], g.x[k + 1]);
      }
      return clamp_open(x);
    }
  }
  return 0.5;
}

namespace detail {

double log_likelihood_raw(Family family, double mu, double dispersion,
                          const std::vector<double>& data) noexcept {
  constexpr double kSentinel = -1e300;
  if (!(std::isfinite(mu) && mu > 0.0 && mu < 1.0) ||
      !(std::isfinite(dispersion) && dispersion > 0.0)) {
    return kSentinel;
  }
  double ll = 0.0;
  switch (family) {
    case Family::beta: {
      const double a = mu * dispersion;
      const double b = (1.0 - mu) * dispersion;
      const double log_norm =
          std::lgamma(dispersion) - std::lgamma(a) - std::lgamma(b);
      for (double x : data) {
        ll += log_norm + (a - 1.0) * std::log(x) +
              (b - 1.0) * std::log1p(-x);
      }
      break;
    }
    case Family::simplex: {
      const double inv_mu_sq = 1.0 / (mu * mu * (1.0 - mu) * (1.0 - mu));
      const double half_inv_sigma_sq = 0.5 / (dispersion * dispersion);
      const double log_norm = -0.5 * (std::log(2.0 * std::numbers::pi) +
                                      2.0 * std::log(dispersion));
      for (double x : data) {
        const double g = x * (1.0 - x);
        const double dev = (x - mu) * (x - mu) / g * inv_mu_sq;
        ll += log_norm - 1.5 * std::log(g) - half_inv_sigma_sq * dev;
      }
      break;
    }
    case Family::unit_gamma: {
      const double log_m = std::log(mu) / dispersion;
      const double theta = std::exp(log_m) / (-std::expm1(log_m));
      if (!std::isfinite(theta)) return kSentinel;
      const double log_norm =
          dispersion * std::log(theta) - std::lgamma(dispersion);
      for (double x : data) {
        ll += log_norm + (theta - 1.0) * std::log(x) +
              (dispersion - 1.0) * std::log(-std::log(x));
      }
      break;
    }
  }
  return std::isfinite(ll) ? ll : kSentinel;
}

}  // namespace detail

double log_likelihood(Family family, const std::vector<double>& params,
                      const std::vector<double>& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(std::isfinite(data[i]) && data[i] > 0.0 && data[i] < 1.0)) {
      std::ostringstream os;
      os << "observation " << (i + 1) << " (" << data[i]
         << ") lies outside the open unit interval";
      throw DataError(os.str(), i + 1);
    }
  }
  if (params.size() != 2) {
    throw DomainError("log_likelihood expects exactly two parameters");
  }
  return detail::log_likelihood_raw(family, params[0], params[1], data);
}

}  // namespace unitchart
