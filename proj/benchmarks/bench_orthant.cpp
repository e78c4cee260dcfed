#include <benchmark/benchmark.h>

#include "orthant/approach.hpp"
#include "orthant/calibrate.hpp"
#include "orthant/harness.hpp"
#include "orthant/partial_monitoring.hpp"
#include "orthant/regret.hpp"
#include "orthant/rng.hpp"
#include "orthant/simplex.hpp"

namespace {

orthant::Matrix random_nonnegative(int n, orthant::Rng& rng) {
  orthant::Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = rng.unit();
  }
  return a;
}

void bm_invariant_probability(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  orthant::Rng rng(7);
  orthant::Matrix a = random_nonnegative(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(orthant::invariant_probability(a));
  }
}
BENCHMARK(bm_invariant_probability)->Arg(4)->Arg(16)->Arg(64);

void bm_blackwell_step(benchmark::State& state) {
  orthant::VectorPayoffGame game = orthant::matching_pennies_game();
  orthant::ConvexTarget target = orthant::ConvexTarget::point(orthant::Vec{0.0});
  orthant::Vec z{0.37};
  for (auto _ : state) {
    benchmark::DoNotOptimize(orthant::blackwell_step(game, target, z));
  }
}
BENCHMARK(bm_blackwell_step);

void bm_calibrator_stage(benchmark::State& state) {
  orthant::FiniteGrid grid = orthant::simplex_grid(2, 0.1);
  orthant::Calibrator cal(grid, 1.0);
  orthant::Rng rng(11);
  orthant::Vec heads{1.0, 0.0};
  orthant::Vec tails{0.0, 1.0};
  for (auto _ : state) {
    cal.forecast(rng);
    cal.observe(rng.unit() < 0.3 ? heads : tails);
    benchmark::DoNotOptimize(cal.stage());
  }
}
BENCHMARK(bm_calibrator_stage);

void bm_worst_case_w(benchmark::State& state) {
  orthant::SignalStructure s =
      orthant::label_efficient_structure({1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5});
  orthant::SimplexVector x = orthant::SimplexVector::normalized({0.2, 0.5, 0.3});
  orthant::Flag mu = orthant::flag_of(s, orthant::SimplexVector::normalized({0.4, 0.6}));
  for (auto _ : state) {
    benchmark::DoNotOptimize(orthant::worst_case_w(s, x, mu));
  }
}
BENCHMARK(bm_worst_case_w);

void bm_simplex_grid(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(orthant::simplex_grid(3, 0.05));
  }
}
BENCHMARK(bm_simplex_grid);

}  // namespace

BENCHMARK_MAIN();
