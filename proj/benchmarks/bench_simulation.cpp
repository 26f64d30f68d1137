#include <benchmark/benchmark.h>

#include "unitchart/charts.hpp"
#include "unitchart/models.hpp"
#include "unitchart/rng.hpp"
#include "unitchart/simulation.hpp"

using unitchart::DesignConfig;
using unitchart::EwmaChart;
using unitchart::Family;
using unitchart::RngStream;
using unitchart::UnitModel;

namespace {

UnitModel case_model(Family family) {
  switch (family) {
    case Family::beta: return UnitModel::beta(0.2, 148.0);
    case Family::simplex: return UnitModel::simplex(0.2, 0.5);
    case Family::unit_gamma: return UnitModel::unit_gamma(0.2, 96.0);
  }
  throw unitchart::DomainError("unknown family");
}

void BM_simulate_run_length(benchmark::State& state) {
  const UnitModel model = case_model(Family(state.range(0)));
  const EwmaChart chart = unitchart::ewma_limits(model, 0.05, 2.5);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    RngStream stream(7, rep++);
    benchmark::DoNotOptimize(unitchart::simulate_run_length(chart, model, stream, 100000));
  }
}
BENCHMARK(BM_simulate_run_length)->Arg(0)->Arg(1)->Arg(2);

void BM_estimate_rl(benchmark::State& state) {
  const UnitModel model = case_model(Family::beta);
  const EwmaChart chart = unitchart::ewma_limits(model, 0.05, 2.5);
  DesignConfig cfg;
  cfg.n_runs = std::uint64_t(state.range(0));
  cfg.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(unitchart::estimate_rl(chart, model, cfg));
}
BENCHMARK(BM_estimate_rl)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_calibrate_L(benchmark::State& state) {
  const UnitModel model = case_model(Family::beta);
  DesignConfig cfg;
  cfg.n_runs = std::uint64_t(state.range(0));
  cfg.seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(unitchart::calibrate_L(model, 0.05, cfg));
}
BENCHMARK(BM_calibrate_L)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
