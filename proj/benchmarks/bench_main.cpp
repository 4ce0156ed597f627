#include <benchmark/benchmark.h>

#include "droplet/dynamics.hpp"
#include "droplet/filters.hpp"
#include "droplet/hamiltonian.hpp"
#include "droplet/spectral.hpp"

using namespace droplet;

namespace {

ChainParams localized(int L) {
  ChainParams p;
  p.half_length = L;
  return p;
}

void BM_FullDiagonalization(benchmark::State& state) {
  const ChainParams p = localized(static_cast<int>(state.range(0)));
  const auto omega = sample_disorder(p.disorder, p.half_length, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(diagonalize_sectors(p.half_length, build_sector_matrices(p, omega)));
  }
}
BENCHMARK(BM_FullDiagonalization)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

// Windowed run with sector lower bounds, as used by the ensemble experiments.
void BM_WindowedDiagonalization(benchmark::State& state) {
  const ChainParams p = localized(static_cast<int>(state.range(0)));
  const auto omega = sample_disorder(p.disorder, p.half_length, 0);
  clean_sector_minima(p);  // memoized; keep the one-time cost out of the loop
  DiagonalizeOptions o;
  o.range = with_ground_state(droplet_window(p.delta, 0.5));
  o.complete_sectors = {1};
  for (auto _ : state) {
    o.lower_bounds = sector_lower_bounds(p, omega);
    benchmark::DoNotOptimize(diagonalize_sectors(p.half_length, build_sector_matrices(p, omega), o));
  }
}
BENCHMARK(BM_WindowedDiagonalization)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_DoubleBracket(benchmark::State& state) {
  const ChainParams p = localized(5);
  const auto omega = sample_disorder(p.disorder, 5, 1);
  const SpectralData sd = diagonalize_sectors(5, build_sector_matrices(p, omega));
  const WindowBasis b = window_basis(sd, EnergyWindow::closed(0.5, 3.0));
  const PairData pd = pair_data(b, sigma_x(5, -2), sigma_x(5, 2));
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(double_bracket(b, pd, t));
    t += 0.1;
  }
  state.counters["window"] = static_cast<double>(b.size());
}
BENCHMARK(BM_DoubleBracket)->Unit(benchmark::kMicrosecond);

void BM_FilterFourier(benchmark::State& state) {
  const Filter f(FilterSpec{});
  const auto grid = uniform_grid(50.0, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(f.fourier(grid));
}
BENCHMARK(BM_FilterFourier)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
