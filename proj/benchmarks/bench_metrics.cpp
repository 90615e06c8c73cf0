#include <benchmark/benchmark.h>

#include "tlskit/metrics.hpp"
#include "tlskit/rng.hpp"

using namespace tlskit;

namespace {

BinaryMask speckle_mask(int size, double fg) {
  SplitMix64 rng(1717);
  BinaryMask m(size, size);
  for (auto& b : m.bits()) b = rng.next_unit() < fg ? 1 : 0;
  return m;
}

}  // namespace

static void BM_ConnectedComponents(benchmark::State& state) {
  const BinaryMask mask = speckle_mask(int(state.range(0)), 0.3);
  for (auto _ : state) {
    auto comps = connected_components(mask);
    benchmark::DoNotOptimize(comps.data());
  }
}
BENCHMARK(BM_ConnectedComponents)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_EvaluateDetection(benchmark::State& state) {
  const int size = int(state.range(0));
  const BinaryMask mask = speckle_mask(size, 0.02);
  SplitMix64 rng(3);
  std::vector<BoundingBox> boxes;
  for (int i = 0; i < 64; ++i) {
    const int x0 = int(rng.next_u64() % (size - 12));
    const int y0 = int(rng.next_u64() % (size - 12));
    boxes.push_back({x0, y0, x0 + 11, y0 + 11});
  }
  for (auto _ : state) {
    EvalReport rep = evaluate_detection(mask, boxes);
    benchmark::DoNotOptimize(&rep);
  }
}
BENCHMARK(BM_EvaluateDetection)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
