#include <benchmark/benchmark.h>

#include <vector>

#include "tlskit/density.hpp"
#include "tlskit/rng.hpp"

using namespace tlskit;

namespace {

std::vector<NucleusRecord> random_nuclei(std::size_t n, double extent_um) {
  SplitMix64 rng(4242);
  std::vector<NucleusRecord> out(n);
  for (auto& rec : out) {
    rec.x_um = rng.next_uniform(0.0, extent_um - 1e-6);
    rec.y_um = rng.next_uniform(0.0, extent_um - 1e-6);
    rec.label = rng.next_unit() < 0.7 ? NucleusLabel::Lymphocyte : NucleusLabel::NonLymphocyte;
  }
  return out;
}

}  // namespace

static void BM_CountNuclei(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  const GridSpec spec{32, 1.0, 20000, 20000};
  const auto nuclei = random_nuclei(n, 20000.0);
  for (auto _ : state) {
    CountGrid g = count_nuclei(nuclei, spec);
    benchmark::DoNotOptimize(g.cells.pixels().data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(n));
}
BENCHMARK(BM_CountNuclei)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_NormalizeDensity(benchmark::State& state) {
  const GridSpec spec{32, 1.0, 20000, 20000};
  const CountGrid counts = count_nuclei(random_nuclei(1000000, 20000.0), spec);
  for (auto _ : state) {
    DensityMap d = normalize_density(counts);
    benchmark::DoNotOptimize(d.cells.pixels().data());
  }
}
BENCHMARK(BM_NormalizeDensity)->Unit(benchmark::kMicrosecond);

static void BM_MeanPool(benchmark::State& state) {
  const int size = int(state.range(0));
  SplitMix64 rng(7);
  MultiChannelImage img(size, size, {"R", "G", "B"});
  for (int c = 0; c < 3; ++c)
    for (float& v : img.channel(c)) v = float(rng.next_uniform(0.0, 255.0));
  for (auto _ : state) {
    MultiChannelImage pooled = mean_pool(img, 32);
    benchmark::DoNotOptimize(pooled.planes().data());
  }
}
BENCHMARK(BM_MeanPool)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
