#include <benchmark/benchmark.h>

#include "tlskit/losses.hpp"
#include "tlskit/rng.hpp"
#include "tlskit/sdt.hpp"

using namespace tlskit;

namespace {

// Disk field: blob-like foreground with a realistic boundary budget.
BinaryMask disk_field(int size) {
  BinaryMask mask(size, size);
  for (int cy = size / 16; cy < size; cy += size / 8)
    for (int cx = size / 16; cx < size; cx += size / 8) {
      const int r = size / 24 + ((cx + cy) / (size / 8)) % (size / 32 + 1);
      for (int y = std::max(0, cy - r); y <= std::min(size - 1, cy + r); ++y)
        for (int x = std::max(0, cx - r); x <= std::min(size - 1, cx + r); ++x)
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) mask.set(x, y, true);
    }
  return mask;
}

}  // namespace

static void BM_Sdf(benchmark::State& state) {
  const int size = int(state.range(0));
  const BinaryMask mask = disk_field(size);
  for (auto _ : state) {
    SdfField f = sdf(mask);
    benchmark::DoNotOptimize(f.values.pixels().data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(size) * size);
}
BENCHMARK(BM_Sdf)->Arg(512)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_EdtSqSparse(benchmark::State& state) {
  const int size = int(state.range(0));
  SplitMix64 rng(99);
  std::vector<PixelCoord> sites;
  for (int i = 0; i < size; ++i)
    sites.push_back({int(rng.next_u64() % size), int(rng.next_u64() % size)});
  for (auto _ : state) {
    auto d = edt_sq(sites, size, size);
    benchmark::DoNotOptimize(d.pixels().data());
  }
}
BENCHMARK(BM_EdtSqSparse)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_SdfLoss(benchmark::State& state) {
  const int size = int(state.range(0));
  const BinaryMask gt = disk_field(size);
  BinaryMask pred = gt;
  pred.set(3, 3, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdf_loss(pred, gt));
  }
}
BENCHMARK(BM_SdfLoss)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
