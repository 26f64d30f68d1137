#include "unitchart/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "unitchart/errors.hpp"
#include "unitchart/numerics.hpp"
#include "unitchart/simulation.hpp"

namespace unitchart {
namespace {

constexpr double kBig = 1e300;

double logit(double p) { return std::log(p / (1.0 - p)); }

double expit(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void validate_unit_data(const std::vector<double>& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(std::isfinite(data[i]) && data[i] > 0.0 && data[i] < 1.0)) {
      std::ostringstream os;
      os << "observation " << (i + 1) << " (" << data[i]
         << ") lies outside the open unit interval";
      throw DataError(os.str(), i + 1);
    }
  }
}

// Method-of-moments-flavoured starting values on the original scale.
std::pair<double, double> starting_values(Family family,
                                          const std::vector<double>& data) {
  const double n = static_cast<double>(data.size());
  double sum = 0.0;
  for (double x : data) sum += x;
  const double mean = sum / n;
  const double mu0 = std::clamp(mean, 1e-6, 1.0 - 1e-6);
  double ss = 0.0;
  for (double x : data) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1.0);

  switch (family) {
    case Family::beta: {
      const double g = mu0 * (1.0 - mu0);
      double phi0 = 100.0;
      if (var > 0.0) phi0 = var >= g ? 0.5 : std::max(g / var - 1.0, 0.1);
      return {mu0, phi0};
    }
    case Family::simplex: {
      // Mean deviance equals the dispersion's closed-form maximizer at a
      // fixed mean, so this start is already near the optimum.
      const double inv = 1.0 / (mu0 * mu0 * (1.0 - mu0) * (1.0 - mu0));
      double dev = 0.0;
      for (double x : data) {
        dev += (x - mu0) * (x - mu0) / (x * (1.0 - x)) * inv;
      }
      return {mu0, std::sqrt(std::max(dev / n, 1e-12))};
    }
    case Family::unit_gamma: {
      // Coarse profile search over the shape at the sample-mean anchor.
      double best_tau = 1.0;
      double best_ll = -std::numeric_limits<double>::infinity();
      const double lo = std::log(0.05), hi = std::log(2000.0);
      for (int i = 0; i < 80; ++i) {
        const double tau = std::exp(lo + (hi - lo) * i / 79.0);
        const double ll = detail::log_likelihood_raw(family, mu0, tau, data);
        if (ll > best_ll) {
          best_ll = ll;
          best_tau = tau;
        }
      }
      return {mu0, best_tau};
    }
  }
  return {mu0, 1.0};
}

// Survival function of the Kolmogorov distribution at t = sqrt(n) * D.
double kolmogorov_sf(double t) {
  if (!(t > 0.0)) return 1.0;
  if (t < 1.18) {
    // Small-t theta-function form: a few terms reach machine precision.
    double s = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double m = (2.0 * k - 1.0) * std::numbers::pi;
      s += std::exp(-m * m / (8.0 * t * t));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / t * s, 0.0,
                      1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    s += (k % 2 == 1) ? term : -term;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

// Anderson-Darling statistic against a fully specified model.
double ad_stat(std::vector<double> xs, const UnitModel& model) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  std::vector<double> F(n);
  for (std::size_t i = 0; i < n; ++i) {
    F[i] = model.cdf(xs[i]);
    if (!(F[i] > 0.0 && F[i] < 1.0)) {
      std::ostringstream os;
      os << "fitted cdf is numerically degenerate at observation " << xs[i];
      throw DataError(os.str(), i + 1);
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += (2.0 * (i + 1.0) - 1.0) *
         (std::log(F[i]) + std::log1p(-F[n - 1 - i]));
  }
  return -static_cast<double>(n) - s / static_cast<double>(n);
}

// Classical asymptotic tail approximation for A-squared with fully known
// parameters (no estimation adjustment).
double ad_asymptotic_pvalue(double z) {
  double p;
  if (z < 0.2) {
    p = 1.0 - std::exp(-13.436 + 101.14 * z - 223.73 * z * z);
  } else if (z < 0.34) {
    p = 1.0 - std::exp(-8.318 + 42.796 * z - 59.938 * z * z);
  } else if (z < 0.6) {
    p = std::exp(0.9177 - 4.279 * z - 1.38 * z * z);
  } else {
    p = std::exp(1.2937 - 5.709 * z + 0.0186 * z * z);
  }
  return std::clamp(p, 0.0, 1.0);
}

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Exact two-sided p-value for the number of runs given n1 values above and
// n2 below, by doubling the smaller conditional tail.
double runs_exact_pvalue(std::uint64_t r_obs, std::uint64_t n1,
                         std::uint64_t n2) {
  const std::uint64_t n = n1 + n2;
  const double lden = log_choose(n, n1);
  const auto lc = [](std::uint64_t m, std::uint64_t k) {
    return log_choose(m, k);
  };
  const std::uint64_t r_max = 2 * std::min(n1, n2) + (n1 == n2 ? 0 : 1);
  double lower = 0.0, upper = 0.0;
  for (std::uint64_t r = 2; r <= r_max; ++r) {
    double prob = 0.0;
    if (r % 2 == 0) {
      const std::uint64_t k = r / 2;
      if (k >= 1 && k - 1 <= n1 - 1 && k - 1 <= n2 - 1) {
        prob = 2.0 * std::exp(lc(n1 - 1, k - 1) + lc(n2 - 1, k - 1) - lden);
      }
    } else {
      const std::uint64_t k = (r - 1) / 2;
      if (k >= 1) {
        if (k <= n1 - 1 && k - 1 <= n2 - 1) {
          prob += std::exp(lc(n1 - 1, k) + lc(n2 - 1, k - 1) - lden);
        }
        if (k - 1 <= n1 - 1 && k <= n2 - 1) {
          prob += std::exp(lc(n1 - 1, k - 1) + lc(n2 - 1, k) - lden);
        }
      }
    }
    if (r <= r_obs) lower += prob;
    if (r >= r_obs) upper += prob;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

}  // namespace

FitReport fit_mle(Family family, const std::vector<double>& data) {
  if (data.size() < 3) {
    throw DataError("maximum-likelihood fitting needs at least 3 observations",
                    0);
  }
  validate_unit_data(data);

  const auto [mu0, d0] = starting_values(family, data);
  const auto nll = [&](const std::vector<double>& t) {
    if (!std::isfinite(t[0]) || !std::isfinite(t[1])) return kBig;
    const double mu = expit(t[0]);
    const double disp = std::exp(t[1]);
    return -detail::log_likelihood_raw(family, mu, disp, data);
  };

  MinimizeResult res;
  try {
    // A 1e-6 gradient sup-norm leaves the estimates accurate far beyond
    // their statistical precision while staying clear of the
    // central-difference noise floor.
    res = minimize(nll, {logit(mu0), std::log(d0)}, Tolerance{1e-6, 0.0, 500});
  } catch (const NumericError& e) {
    throw EstimationError(std::string("fit did not converge (") +
                          std::string(family_name(family)) + "): " + e.what());
  }

  const double mu_hat = expit(res.argmin[0]);
  const double d_hat = std::exp(res.argmin[1]);
  const double loglik = -res.min;

  const auto H = numeric_hessian(nll, res.argmin);
  const double det = H[0][0] * H[1][1] - H[0][1] * H[1][0];
  if (!(std::isfinite(det) && H[0][0] > 0.0 && det > 0.0)) {
    throw EstimationError(
        "observed information is not positive definite at the optimum");
  }
  // Delta method back to the original scale: d mu / d t0 = mu (1 - mu),
  // d disp / d t1 = disp.
  const double var_mu =
      mu_hat * (1.0 - mu_hat) * mu_hat * (1.0 - mu_hat) * (H[1][1] / det);
  const double var_d = d_hat * d_hat * (H[0][0] / det);
  if (!(var_mu > 0.0 && var_d > 0.0 && std::isfinite(var_mu) &&
        std::isfinite(var_d))) {
    throw EstimationError("standard errors are not finite and positive");
  }

  FitReport report;
  report.family = family;
  report.estimates = {mu_hat, d_hat};
  report.std_errors = {std::sqrt(var_mu), std::sqrt(var_d)};
  report.loglik = loglik;
  report.aic = -2.0 * loglik + 4.0;
  report.bic = -2.0 * loglik + 2.0 * std::log(static_cast<double>(data.size()));
  report.n = data.size();
  report.iterations = res.iterations;
  report.converged = res.converged;
  return report;
}

std::vector<FitReport> select_model(std::vector<FitReport> reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const FitReport& a, const FitReport& b) {
                     if (a.aic != b.aic) return a.aic < b.aic;
                     if (a.bic != b.bic) return a.bic < b.bic;
                     return static_cast<int>(a.family) <
                            static_cast<int>(b.family);
                   });
  return reports;
}

TestResult ks_test(const std::vector<double>& data, const UnitModel& model) {
  if (data.empty()) throw DataError("the KS test needs at least 1 observation", 0);
  std::vector<double> xs(data);
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = model.cdf(xs[i]);
    d = std::max(d, std::max((i + 1.0) / n - F, F - i / n));
  }
  return {d, kolmogorov_sf(std::sqrt(n) * d)};
}

TestResult ad_test(const std::vector<double>& data, const UnitModel& model,
                   const AdOptions& options) {
  if (data.size() < 2) {
    throw DataError("the AD test needs at least 2 observations", 0);
  }
  const double a2 = ad_stat(data, model);
  if (options.method == AdMethod::asymptotic) {
    return {a2, ad_asymptotic_pvalue(a2)};
  }

  if (options.n_resamples < 1) {
    throw DomainError("the bootstrap needs at least one resample");
  }
  const std::uint64_t b_total = static_cast<std::uint64_t>(options.n_resamples);
  const std::size_t n = data.size();
  std::vector<double> stats(b_total);
  detail::parallel_for(
      b_total, detail::resolve_threads(options.threads),
      [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<double> resample(n);
        for (std::uint64_t b = begin; b < end; ++b) {
          RngStream stream(options.seed, b);
          for (std::size_t i = 0; i < n; ++i) {
            resample[i] = model.sample(stream);
          }
          // Refit the same family so the null distribution reflects
          // parameter estimation; fall back to the sampling model when the
          // resample defeats the optimizer.
          double stat;
          try {
            const FitReport refit = fit_mle(model.family(), resample);
            const UnitModel refit_model = UnitModel::make(
                model.family(), refit.estimates[0], refit.estimates[1]);
            stat = ad_stat(resample, refit_model);
          } catch (const Error&) {
            try {
              stat = ad_stat(resample, model);
            } catch (const Error&) {
              stat = std::numeric_limits<double>::infinity();
            }
          }
          stats[b] = stat;
        }
      });
  std::uint64_t exceed = 0;
  for (double s : stats) {
    if (s >= a2) ++exceed;
  }
  const double p = (1.0 + static_cast<double>(exceed)) /
                   (static_cast<double>(b_total) + 1.0);
  return {a2, p};
}

GofReport gof_tests(const std::vector<double>& data, const UnitModel& model,
                    const AdOptions& options) {
  const TestResult ks = ks_test(data, model);
  const TestResult ad = ad_test(data, model, options);
  return {ad.stat, ad.pvalue, ks.stat, ks.pvalue};
}

RunsTestReport runs_test(const std::vector<double>& data, RunsMethod method) {
  if (data.size() < 2) {
    throw DataError("the runs test needs at least 2 observations", 0);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw DataError("non-finite observation in runs test", i + 1);
    }
  }
  std::vector<double> sorted(data);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 == 1
                            ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  std::vector<int> signs;
  signs.reserve(n);
  for (double x : data) {
    if (x > median) {
      signs.push_back(1);
    } else if (x < median) {
      signs.push_back(-1);
    }  // values equal to the median are dropped
  }
  if (signs.size() < 2) {
    throw DataError(
        "fewer than two observations remain after dropping median ties", 0);
  }

  RunsTestReport report;
  std::uint64_t runs = 1;
  for (std::size_t i = 1; i < signs.size(); ++i) {
    if (signs[i] != signs[i - 1]) ++runs;
  }
  report.n_runs_observed = runs;
  report.n_above =
      static_cast<std::uint64_t>(std::count(signs.begin(), signs.end(), 1));
  report.n_below = signs.size() - report.n_above;

  if (report.n_above == 0 || report.n_below == 0) {
    report.pvalue = 1.0;  // a single run carries no evidence either way
    return report;
  }
  if (method == RunsMethod::exact) {
    report.pvalue = runs_exact_pvalue(runs, report.n_above, report.n_below);
    return report;
  }
  const double n1 = static_cast<double>(report.n_above);
  const double n2 = static_cast<double>(report.n_below);
  const double nn = n1 + n2;
  const double mean = 1.0 + 2.0 * n1 * n2 / nn;
  const double var =
      2.0 * n1 * n2 * (2.0 * n1 * n2 - nn) / (nn * nn * (nn - 1.0));
  if (!(var > 0.0)) {
    report.pvalue = 1.0;
    return report;
  }
  const double z = (static_cast<double>(runs) - mean) / std::sqrt(var);
  report.pvalue = std::erfc(std::fabs(z) / std::numbers::sqrt2);
  return report;
}

}  // namespace unitchart
