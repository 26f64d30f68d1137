#include <benchmark/benchmark.h>

#include "unitchart/models.hpp"
#include "unitchart/rng.hpp"

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

void BM_pdf(benchmark::State& state) {
  const UnitModel model = case_model(Family(state.range(0)));
  double x = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.pdf(x));
    x += 1e-4;
    if (x > 0.95) x = 0.05;
  }
}
BENCHMARK(BM_pdf)->Arg(0)->Arg(1)->Arg(2);

void BM_cdf(benchmark::State& state) {
  const UnitModel model = case_model(Family(state.range(0)));
  double x = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.cdf(x));
    x += 1e-4;
    if (x > 0.95) x = 0.05;
  }
}
BENCHMARK(BM_cdf)->Arg(0)->Arg(1)->Arg(2);

void BM_quantile(benchmark::State& state) {
  const UnitModel model = case_model(Family(state.range(0)));
  double p = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.quantile(p));
    p += 1e-4;
    if (p > 0.99) p = 0.01;
  }
}
BENCHMARK(BM_quantile)->Arg(0)->Arg(1)->Arg(2);

void BM_sample(benchmark::State& state) {
  const UnitModel model = case_model(Family(state.range(0)));
  RngStream stream(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(model.sample(stream));
}
BENCHMARK(BM_sample)->Arg(0)->Arg(1)->Arg(2);

// Simplex construction pays for its quantile grid up front; the other two
// families are cheap to build.
void BM_construct_simplex(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(UnitModel::simplex(0.2, 0.5));
}
BENCHMARK(BM_construct_simplex);

}  // namespace
