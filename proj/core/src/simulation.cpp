#include "unitchart/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <string>
#include <thread>

#include "unitchart/errors.hpp"

namespace unitchart {

void DesignConfig::validate() const {
  if (!(std::isfinite(arl0) && arl0 > 1.0)) {
    throw DomainError("arl0 must be a finite value greater than 1");
  }
  if (!(std::isfinite(xi) && xi > 0.0)) {
    throw DomainError("xi must be positive");
  }
  if (n_runs < 1) throw DomainError("n_runs must be at least 1");
  if (!(static_cast<double>(rl_cap) > arl0 * 100.0)) {
    throw DomainError("rl_cap must exceed 100 times the target ARL");
  }
  if (!(std::isfinite(l_grid) && l_grid > 0.0)) {
    throw DomainError("l_grid must be positive");
  }
  if (threads < 0) throw DomainError("threads must be nonnegative");
}

namespace detail {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("UNITCHART_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0 && v < 4096) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::uint64_t n, int threads,
                  const std::function<void(std::uint64_t, std::uint64_t)>& body) {
  if (n == 0) return;
  const std::uint64_t workers =
      std::min<std::uint64_t>(std::max(threads, 1), n);
  if (workers == 1) {
    body(0, n);
    return;
  }
  const std::uint64_t chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const auto run = [&](std::uint64_t w) {
    const std::uint64_t begin = w * chunk;
    const std::uint64_t end = std::min(n, begin + chunk);
    if (begin >= end) return;
    try {
      body(begin, end);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  for (std::uint64_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

double p_out(const UnitModel& model, double lcl, double ucl) {
  if (!(std::isfinite(lcl) && std::isfinite(ucl) && 0.0 < lcl && lcl < ucl &&
        ucl < 1.0)) {
    throw DomainError("p_out requires 0 < lcl < ucl < 1");
  }
  return model.cdf(lcl) + 1.0 - model.cdf(ucl);
}

RunLengthSummary shewhart_rl_exact(double p) {
  if (!(std::isfinite(p) && p > 0.0 && p <= 1.0)) {
    throw DomainError("signal probability must lie in (0,1]");
  }
  RunLengthSummary s;
  s.arl = 1.0 / p;
  s.sdrl = std::sqrt(1.0 - p) / p;
  s.mrl = p == 1.0 ? 1.0 : std::ceil(std::log(0.5) / std::log1p(-p));
  s.n_runs = 0;
  s.se_arl = 0.0;
  return s;
}

std::uint64_t simulate_run_length(const EwmaChart& chart, const UnitModel& model,
                                  RngStream& stream, std::uint64_t rl_cap) {
  double z = chart.cl;
  for (std::uint64_t t = 1; t <= rl_cap; ++t) {
    z = ewma_update(z, model.sample(stream), chart.lambda);
    if (z < chart.lcl || z > chart.ucl) return t;
  }
  return rl_cap;
}

std::uint64_t simulate_run_length(const ShewhartChart& chart,
                                  const UnitModel& model, RngStream& stream,
                                  std::uint64_t rl_cap) {
  for (std::uint64_t t = 1; t <= rl_cap; ++t) {
    const double x = model.sample(stream);
    if (x < chart.lcl || x > chart.ucl) return t;
  }
  return rl_cap;
}

namespace {

// Summarize counted run lengths (offset already applied). Values are read in
// index order with extended precision so the result does not depend on how
// replications were distributed over workers.
RunLengthSummary summarize(const std::vector<std::uint64_t>& rl,
                           std::uint64_t censored) {
  const std::uint64_t n = rl.size();
  RunLengthSummary s;
  s.n_runs = n;
  s.censored = censored;
  s.censor_warning = censored * 100 > n;

  long double sum = 0.0L;
  for (std::uint64_t v : rl) sum += static_cast<long double>(v);
  const long double mean = sum / static_cast<long double>(n);
  long double ss = 0.0L;
  for (std::uint64_t v : rl) {
    const long double d = static_cast<long double>(v) - mean;
    ss += d * d;
  }
  s.arl = static_cast<double>(mean);
  s.sdrl = n > 1 ? static_cast<double>(
                       std::sqrt(ss / static_cast<long double>(n - 1)))
                 : 0.0;
  s.se_arl = s.sdrl / std::sqrt(static_cast<double>(n));

  std::vector<std::uint64_t> sorted(rl);
  std::sort(sorted.begin(), sorted.end());
  if (n % 2 == 1) {
    s.mrl = static_cast<double>(sorted[n / 2]);
  } else {
    s.mrl = 0.5 * (static_cast<double>(sorted[n / 2 - 1]) +
                   static_cast<double>(sorted[n / 2]));
  }
  return s;
}

template <typename Chart>
RunLengthSummary estimate_rl_impl(const Chart& chart, const UnitModel& model,
                                  const DesignConfig& config,
                                  std::uint64_t offset) {
  config.validate();
  const std::uint64_t n = config.n_runs;
  std::vector<std::uint64_t> rl(n);
  detail::parallel_for(n, detail::resolve_threads(config.threads),
                       [&](std::uint64_t begin, std::uint64_t end) {
                         for (std::uint64_t i = begin; i < end; ++i) {
                           RngStream stream(config.seed, i);
                           rl[i] = simulate_run_length(chart, model, stream,
                                                       config.rl_cap);
                         }
                       });
  std::uint64_t censored = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (rl[i] == config.rl_cap) ++censored;
  }
  if (censored * 2 > n) {
    throw EstimationError(
        "more than half of the replications were censored at the run-length "
        "cap; the chart rarely signals under this model");
  }
  if (offset > 0) {
    for (auto& v : rl) v += offset;
  }
  return summarize(rl, censored);
}

}  // namespace

RunLengthSummary estimate_rl(const EwmaChart& chart, const UnitModel& model,
                             const DesignConfig& config, RlCounting counting) {
  const std::uint64_t offset =
      counting == RlCounting::plotted_points ? 1 : 0;
  return estimate_rl_impl(chart, model, config, offset);
}

RunLengthSummary estimate_rl(const ShewhartChart& chart, const UnitModel& model,
                             const DesignConfig& config, RlCounting counting) {
  (void)counting;  // a Shewhart chart plots the observations themselves
  return estimate_rl_impl(chart, model, config, 0);
}

namespace {

struct ExceedanceRecord {
  std::uint64_t t;  // first time the running deviation maximum reached d
  double d;         // deviation in multiplier units
};

// Time of the first deviation strictly above L, or horizon if none. Records
// are strictly increasing in both fields, so the first crossing of any level
// happens at a record.
inline std::uint64_t first_exceedance(const std::vector<ExceedanceRecord>& recs,
                                      double L, std::uint64_t horizon) {
  const auto it = std::upper_bound(
      recs.begin(), recs.end(), L,
      [](double lhs, const ExceedanceRecord& r) { return lhs < r.d; });
  return it == recs.end() ? horizon : it->t;
}

}  // namespace

CalibrationResult calibrate_L(const UnitModel& model, double lambda,
                              const DesignConfig& config, RlCounting counting) {
  config.validate();
  if (!(std::isfinite(lambda) && lambda > 0.0 && lambda <= 1.0)) {
    throw DomainError("lambda must lie in (0,1]");
  }
  const double cl = model.mean();
  const double width_unit =
      model.std_dev() * std::sqrt(lambda / (2.0 - lambda));
  const std::uint64_t offset =
      counting == RlCounting::plotted_points ? 1 : 0;

  // Probe horizon: long enough that the in-control run-length mass beyond it
  // is negligible (about exp(-20)) for charts near the target ARL.
  const std::uint64_t horizon =
      static_cast<std::uint64_t>(std::ceil(20.0 * config.arl0));

  // Walk each replication's in-control path once, recording only the times
  // at which the running maximum deviation increases. The run length under
  // any candidate multiplier follows exactly from these records, giving
  // common random numbers across the whole L search for free.
  const std::uint64_t n = config.n_runs;
  std::vector<std::vector<ExceedanceRecord>> records(n);
  detail::parallel_for(
      n, detail::resolve_threads(config.threads),
      [&](std::uint64_t begin, std::uint64_t end) {
        const double inv_w = 1.0 / width_unit;
        for (std::uint64_t i = begin; i < end; ++i) {
          RngStream stream(config.seed, i);
          auto& recs = records[i];
          recs.reserve(32);
          double z = cl;
          double dmax = 0.0;
          for (std::uint64_t t = 1; t <= horizon; ++t) {
            z = ewma_update(z, model.sample(stream), lambda);
            const double d = std::fabs(z - cl) * inv_w;
            if (d > dmax) {
              dmax = d;
              recs.push_back({t, d});
            }
          }
        }
      });

  const auto arl_at = [&](double L) {
    long double sum = 0.0L;
    for (const auto& recs : records) {
      sum += static_cast<long double>(first_exceedance(recs, L, horizon) +
                                      offset);
    }
    return static_cast<double>(sum / static_cast<long double>(n));
  };

  // Lattice bisection for the smallest multiple of l_grid whose estimated
  // ARL reaches arl0 - xi; the record construction makes arl_at monotone.
  const double lo_target = config.arl0 - config.xi;
  const double hi_target = config.arl0 + config.xi;
  std::uint64_t hi_k =
      static_cast<std::uint64_t>(std::floor(6.0 / config.l_grid + 1e-9));
  if (hi_k < 1) throw DomainError("l_grid is too coarse for the L search");
  if (arl_at(static_cast<double>(hi_k) * config.l_grid) < lo_target) {
    throw DesignError(
        "no multiplier below 6 reaches the target in-control ARL");
  }
  std::uint64_t lo_k = 0;  // arl at L=0 is offset+1 < lo_target by validation
  while (hi_k - lo_k > 1) {
    const std::uint64_t mid = lo_k + (hi_k - lo_k) / 2;
    if (arl_at(static_cast<double>(mid) * config.l_grid) < lo_target) {
      lo_k = mid;
    } else {
      hi_k = mid;
    }
  }
  const double L = static_cast<double>(hi_k) * config.l_grid;
  const double achieved_arl = arl_at(L);
  if (!(achieved_arl < hi_target)) {
    std::ostringstream os;
    os << "the lattice step overshoots the tolerance window: ARL jumps to "
       << achieved_arl << " at L = " << L;
    throw DesignError(os.str());
  }
  if (!(cl - L * width_unit > 0.0 && cl + L * width_unit < 1.0)) {
    throw DesignError("calibrated limits fall outside the unit interval");
  }

  std::vector<std::uint64_t> rl(n);
  std::uint64_t censored = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t t = first_exceedance(records[i], L, horizon);
    if (t == horizon) ++censored;
    rl[i] = t + offset;
  }
  CalibrationResult result;
  result.L = L;
  result.achieved = summarize(rl, censored);
  return result;
}

namespace {

template <typename Chart>
std::vector<std::pair<double, RunLengthSummary>> ooc_profile_impl(
    const Chart& chart, Family family, const ShiftProfile& profile,
    const DesignConfig& config, RlCounting counting) {
  std::vector<std::pair<double, RunLengthSummary>> out;
  out.reserve(profile.deltas.size());
  for (double delta : profile.deltas) {
    const double mu1 = profile.mu0 + delta;
    if (!(mu1 > 0.0 && mu1 < 1.0)) {
      std::ostringstream os;
      os << "shifted mean " << mu1 << " lies outside (0,1)";
      throw DomainError(os.str());
    }
    const UnitModel shifted = UnitModel::make(family, mu1, profile.dispersion);
    out.emplace_back(mu1, estimate_rl(chart, shifted, config, counting));
  }
  return out;
}

}  // namespace

std::vector<std::pair<double, RunLengthSummary>> ooc_profile(
    const EwmaChart& chart, Family family, const ShiftProfile& profile,
    const DesignConfig& config, RlCounting counting) {
  return ooc_profile_impl(chart, family, profile, config, counting);
}

std::vector<std::pair<double, RunLengthSummary>> ooc_profile(
    const ShewhartChart& chart, Family family, const ShiftProfile& profile,
    const DesignConfig& config, RlCounting counting) {
  return ooc_profile_impl(chart, family, profile, config, counting);
}

RobustnessMatrix robustness_matrix(const std::array<UnitModel, 3>& case_models,
                                   double lambda,
                                   const std::vector<double>& deltas,
                                   const DesignConfig& config,
                                   RlCounting counting) {
  config.validate();
  const double mu0 = case_models[0].mean();
  for (const auto& m : case_models) {
    if (std::fabs(m.mean() - mu0) > 1e-12) {
      throw DomainError("case models must share the same in-control mean");
    }
  }

  RobustnessMatrix out;
  out.lambda = lambda;
  for (int j = 0; j < 3; ++j) {
    const CalibrationResult cal = calibrate_L(case_models[j], lambda, config,
                                              counting);
    out.l_values[j] = cal.L;
    out.charts[j] = ewma_limits(case_models[j], lambda, cal.L);
  }
  out.mu1.reserve(deltas.size());
  for (double delta : deltas) out.mu1.push_back(mu0 + delta);

  out.cells.reserve(9 * deltas.size());
  for (int t = 0; t < 3; ++t) {
    const Family true_family = case_models[t].family();
    const double true_disp = case_models[t].dispersion();
    for (int j = 0; j < 3; ++j) {
      for (double mu1 : out.mu1) {
        if (!(mu1 > 0.0 && mu1 < 1.0)) {
          throw DomainError("shifted mean lies outside (0,1)");
        }
        UnitModel true_model = UnitModel::make(true_family, mu1, true_disp);
        RunLengthSummary summary =
            estimate_rl(out.charts[j], true_model, config, counting);
        out.cells.push_back(RobustnessCell{std::move(true_model),
                                           case_models[j], lambda,
                                           std::move(summary)});
      }
    }
  }
  return out;
}

}  // namespace unitchart
