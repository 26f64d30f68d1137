#pragma once

#include <cstdint>
#include <vector>

#include "unitchart/models.hpp"

namespace unitchart {

// Maximum-likelihood fit of one family. estimates and std_errors are ordered
// (mean, dispersion) on the original scale.
struct FitReport {
  Family family = Family::beta;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::uint64_t n = 0;
  int iterations = 0;
  bool converged = false;
};

struct GofReport {
  double ad_stat = 0.0;
  double ad_pvalue = 0.0;
  double ks_stat = 0.0;
  double ks_pvalue = 0.0;
};

struct RunsTestReport {
  std::uint64_t n_runs_observed = 0;
  std::uint64_t n_above = 0;
  std::uint64_t n_below = 0;
  double pvalue = 1.0;
};

struct TestResult {
  double stat = 0.0;
  double pvalue = 0.0;
};

// How the Anderson-Darling p-value is obtained. The parametric bootstrap
// refits the family on every resample and is the default; the asymptotic
// mode applies the classical fully-specified-parameter approximation, which
// is fast but ignores estimation effects.
enum class AdMethod { bootstrap, asymptotic };

struct AdOptions {
  AdMethod method = AdMethod::bootstrap;
  int n_resamples = 1000;
  std::uint64_t seed = 104729;
  int threads = 0;  // 0 = auto
};

// Runs-test flavor: the normal approximation (no continuity correction) is
// the default; the exact conditional distribution of the number of runs is
// available for small samples.
enum class RunsMethod { normal_approx, exact };

// Fit a family by maximum likelihood on data strictly inside (0,1), n >= 3.
// Optimization runs on (logit mean, log dispersion); standard errors come
// from the inverse numerical Hessian mapped back to the original scale.
// Non-convergence raises EstimationError with diagnostics.
FitReport fit_mle(Family family, const std::vector<double>& data);

// Rank fits ascending by AIC, ties broken by BIC and then by the family
// order beta, simplex, unit_gamma. All reports must be fits of one data set.
std::vector<FitReport> select_model(std::vector<FitReport> reports);

// Kolmogorov-Smirnov test of data against a fully built model. The p-value
// uses the asymptotic Kolmogorov distribution at sqrt(n) * stat, which does
// not adjust for estimated parameters.
TestResult ks_test(const std::vector<double>& data, const UnitModel& model);

// Anderson-Darling test of data against the model. Under the default
// bootstrap, resample b draws substream (options.seed, b), so the p-value is
// deterministic and independent of the worker count. A fitted cdf value of
// exactly 0 or 1 at a data point makes the statistic undefined and raises
// DataError naming the point.
TestResult ad_test(const std::vector<double>& data, const UnitModel& model,
                   const AdOptions& options = {});

// Both goodness-of-fit tests in one report.
GofReport gof_tests(const std::vector<double>& data, const UnitModel& model,
                    const AdOptions& options = {});

// Two-sided runs test for randomness about the sample median. Values equal
// to the median are dropped; fewer than two remaining values raise
// DataError.
RunsTestReport runs_test(const std::vector<double>& data,
                         RunsMethod method = RunsMethod::normal_approx);

}  // namespace unitchart
