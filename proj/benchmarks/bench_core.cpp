#include <benchmark/benchmark.h>

#include <random>

#include "dvfinv/control.hpp"
#include "dvfinv/solver.hpp"
#include "dvfinv/spectral.hpp"
#include "dvfinv/stats.hpp"
#include "dvfinv/synth.hpp"

using namespace dvfinv;

namespace {

const GeneratedDvf& appendix(double half_width) {
  static const GeneratedDvf small = generate({AppendixRadial{0.8, 8}, appendix_geometry(0.05, 8.0)});
  static const GeneratedDvf large = generate({AppendixRadial{0.8, 8}, appendix_geometry(0.05, 17.0)});
  return half_width < 10.0 ? small : large;
}

}  // namespace

static void BM_Eigenvalues3(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d;
  Mat3 m{};
  for (auto& row : m)
    for (auto& x : row) x = d(rng);
  for (auto _ : state) {
    m[0][0] += 1e-12;
    benchmark::DoNotOptimize(eigenvalues(m, 3));
  }
}
BENCHMARK(BM_Eigenvalues3);

static void BM_ResidualV(benchmark::State& state) {
  const GeneratedDvf& ap = appendix(static_cast<double>(state.range(0)));
  const DomainMask box = centered_box(ap.forward.geometry, state.range(0) / 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(residual_v(ap.forward, ap.inverse, box));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(box.count()));
}
BENCHMARK(BM_ResidualV)->Arg(8)->Arg(17)->Unit(benchmark::kMillisecond);

static void BM_Characterize(benchmark::State& state) {
  const GeneratedDvf& ap = appendix(static_cast<double>(state.range(0)));
  const DomainMask box = centered_box(ap.forward.geometry, state.range(0) / 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(characterize(ap.forward, box));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(box.count()));
}
BENCHMARK(BM_Characterize)->Arg(8)->Arg(17)->Unit(benchmark::kMillisecond);

static void BM_Percentile(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> d;
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (auto& x : xs) x = d(rng);
  const auto mode = state.range(1) ? PercentileMode::Histogram : PercentileMode::Exact;
  for (auto _ : state) benchmark::DoNotOptimize(percentile(xs, 98.0, mode));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Percentile)->Args({1 << 20, 0})->Args({1 << 20, 1})->Unit(benchmark::kMillisecond);

static void BM_VariantInversion(benchmark::State& state) {
  const GeneratedDvf& ap = appendix(8.0);
  const DomainMask box = centered_box(ap.forward.geometry, 4.0);
  const SpectralMaps maps = characterize(ap.forward, box);
  MuMapOptions opts;
  opts.degenerate = ap.singular;
  const MuMap mm = build_mu_map(ap.forward, maps, opts);
  InversionConfig cfg;
  cfg.scheme = VariantControl{mm.mu};
  cfg.domain = box;
  cfg.max_steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(invert(ap.forward, cfg));
}
BENCHMARK(BM_VariantInversion)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
