#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "infrisk/calibration/fit.hpp"

namespace {

using namespace infrisk;

CohortDataset cohort(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  CohortDataset ds;
  ds.schema_id = "bench";
  ds.feature_ids = {"x1", "x2"};
  ds.interaction_pairs = {{"x1", "x2"}};
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = normal(rng), x2 = normal(rng);
    CohortRow row;
    row.features.values = {{"x1", x1}, {"x2", x2}};
    row.outcome = unit(rng) < 1.0 / (1.0 + std::exp(2.0 - x1 - 0.5 * x1 * x2)) ? 1 : 0;
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

void BM_FitLogistic(benchmark::State& state) {
  const auto ds = cohort(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_logistic(ds));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitLogistic)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
