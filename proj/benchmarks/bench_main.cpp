#include <benchmark/benchmark.h>

#include <random>

#include "nhft/continuum.hpp"
#include "nhft/hft.hpp"

using namespace nhft;

namespace {

ComplexMatrix random_matrix(std::size_t n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> dist;
  ComplexMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = {dist(rng), dist(rng)};
  return m;
}

void BM_Eigendecompose(benchmark::State& state) {
  const ComplexMatrix m = random_matrix(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eigendecompose(m));
}
BENCHMARK(BM_Eigendecompose)->Arg(8)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_PairLeftRight(benchmark::State& state) {
  const ComplexMatrix h = build(ModelInstance::lattice_pt(static_cast<int>(state.range(0)), 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(pair_left_right(h));
}
BENCHMARK(BM_PairLeftRight)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_LatticeSweep(benchmark::State& state) {
  const ModelInstance m = ModelInstance::lattice_pt(static_cast<int>(state.range(0)), 0.0);
  const auto grid = linear_grid(0.05, 0.95, 19);
  for (auto _ : state) benchmark::DoNotOptimize(sweep(m, grid));
}
BENCHMARK(BM_LatticeSweep)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ContinuumQuadrature(benchmark::State& state) {
  const OscState s{static_cast<unsigned>(state.range(0)), 0, derive_params(1.0, 3.0, 1.0, 1.0, 5.0)};
  for (auto _ : state) benchmark::DoNotOptimize(hft_lhs_quadrature(s));
}
BENCHMARK(BM_ContinuumQuadrature)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
