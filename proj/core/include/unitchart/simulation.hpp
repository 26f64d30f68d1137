#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "unitchart/charts.hpp"
#include "unitchart/models.hpp"

namespace unitchart {

// Run-length counting convention. A two-sided EWMA chart plots the anchor
// value Z0 at the centre line before any data arrive; counting plotted points
// therefore yields one more than the index of the first signalling
// observation. Shewhart charts have no anchor, so both conventions coincide
// there. Tabulated reference values follow the plotted-points convention.
enum class RlCounting {
  signal_index,    // observations drawn until the first signal
  plotted_points,  // chart points plotted until the first signal
};

// Calibration targets and simulation budget.
struct DesignConfig {
  double arl0 = 370.4;          // target in-control ARL
  double xi = 4.0;              // half-width of the acceptance window on ARL
  std::uint64_t n_runs = 10000; // Monte-Carlo replications
  std::uint64_t seed = 0;       // base seed; replication i uses substream i
  std::uint64_t rl_cap = 5000000;  // censoring cap for run lengths
  double l_grid = 0.001;        // lattice resolution of the L search
  int threads = 0;              // worker count; 0 = auto

  void validate() const;
};

// Summary statistics of a run-length sample (or of the exact geometric
// distribution, in which case n_runs is zero and se_arl is zero).
struct RunLengthSummary {
  double arl = 0.0;
  double sdrl = 0.0;
  double mrl = 0.0;
  std::uint64_t n_runs = 0;
  double se_arl = 0.0;
  std::uint64_t censored = 0;     // replications that hit the cap
  bool censor_warning = false;    // more than 1% of replications censored
};

// A grid of mean shifts around mu0 with the dispersion held fixed.
struct ShiftProfile {
  double mu0 = 0.0;
  std::vector<double> deltas;  // signed shifts; mu1 = mu0 + delta
  double dispersion = 0.0;     // in-control dispersion, unaffected by shifts
};

// One cell of the cross-model robustness study: observations come from
// true_model while the limits belong to limits_model's calibrated chart.
struct RobustnessCell {
  UnitModel true_model;    // shifted model the observations are drawn from
  UnitModel limits_model;  // in-control model whose limits are applied
  double lambda;
  RunLengthSummary summary;
};

// Full cross-model study for one smoothing constant: three calibrated charts
// and a true-model x limits-model x shift grid of run-length summaries.
// cells is ordered with the true model slowest, then the limits model, then
// the shift: index = (t * 3 + l) * mu1.size() + s.
struct RobustnessMatrix {
  double lambda = 0.0;
  std::array<double, 3> l_values{};
  std::array<EwmaChart, 3> charts{};
  std::vector<double> mu1;
  std::vector<RobustnessCell> cells;
};

struct CalibrationResult {
  double L = 0.0;
  RunLengthSummary achieved;
};

// Probability that a single observation falls outside (lcl, ucl).
double p_out(const UnitModel& model, double lcl, double ucl);

// Exact run-length metrics of a Shewhart chart with per-point signal
// probability p (the run length is geometric).
RunLengthSummary shewhart_rl_exact(double p);

// Draw observations from model until the chart statistic first leaves
// [lcl, ucl]; returns that observation's index (1-based), or rl_cap if no
// signal occurred by then (a censored run). The EWMA recursion restarts at
// the centre line.
std::uint64_t simulate_run_length(const EwmaChart& chart, const UnitModel& model,
                                  RngStream& stream, std::uint64_t rl_cap);
std::uint64_t simulate_run_length(const ShewhartChart& chart,
                                  const UnitModel& model, RngStream& stream,
                                  std::uint64_t rl_cap);

// Monte-Carlo run-length summary over config.n_runs replications.
// Replication i always consumes random substream (config.seed, i), so the
// result is bit-identical across runs and worker counts. With censored
// replications present the ARL is a lower bound; more than half censored is
// an estimation error.
RunLengthSummary estimate_rl(const EwmaChart& chart, const UnitModel& model,
                             const DesignConfig& config,
                             RlCounting counting = RlCounting::plotted_points);
RunLengthSummary estimate_rl(const ShewhartChart& chart, const UnitModel& model,
                             const DesignConfig& config,
                             RlCounting counting = RlCounting::plotted_points);

// Find the smallest multiplier on the l_grid lattice whose estimated
// in-control ARL falls inside (arl0 - xi, arl0 + xi). Uses common random
// numbers across candidates: each replication's in-control path is walked
// once and only its limit-exceedance records are kept, from which the run
// length under any candidate L follows exactly; the estimated ARL is then
// monotone in L and a lattice bisection is exact. Fails with a design error
// if no multiplier below 6 reaches the window.
CalibrationResult calibrate_L(const UnitModel& model, double lambda,
                              const DesignConfig& config,
                              RlCounting counting = RlCounting::plotted_points);

// Out-of-control profile: one estimate_rl per shifted mean, dispersion fixed.
std::vector<std::pair<double, RunLengthSummary>> ooc_profile(
    const EwmaChart& chart, Family family, const ShiftProfile& profile,
    const DesignConfig& config,
    RlCounting counting = RlCounting::plotted_points);
std::vector<std::pair<double, RunLengthSummary>> ooc_profile(
    const ShewhartChart& chart, Family family, const ShiftProfile& profile,
    const DesignConfig& config,
    RlCounting counting = RlCounting::plotted_points);

// Cross-model robustness study: calibrate one chart per case model, then
// simulate every true-model/limits-model pair across the shift grid. All
// cells share the seed, so the diagonal reproduces ooc_profile exactly.
RobustnessMatrix robustness_matrix(const std::array<UnitModel, 3>& case_models,
                                   double lambda,
                                   const std::vector<double>& deltas,
                                   const DesignConfig& config,
                                   RlCounting counting = RlCounting::plotted_points);

namespace detail {

// Effective worker count: requested if positive, else the UNITCHART_THREADS
// environment variable, else the hardware concurrency.
int resolve_threads(int requested);

// Run body(begin, end) over contiguous chunks of [0, n) on `threads` workers.
// Chunk boundaries depend only on (n, threads); exceptions propagate.
void parallel_for(std::uint64_t n, int threads,
                  const std::function<void(std::uint64_t, std::uint64_t)>& body);

}  // namespace detail

}  // namespace unitchart
