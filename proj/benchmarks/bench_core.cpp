#include <benchmark/benchmark.h>

#include "skewlab/estimators.hpp"
#include "skewlab/thermo.hpp"

using namespace skewlab;

namespace {

const SkewProduct& example() {
  static const SkewProduct F(make_doubling(), arctan_family(0.9, 0.4, 0.9, 0.8));
  return F;
}

void BM_SkeletonBuild(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(UlamSkeleton(example(), k).size());
}
BENCHMARK(BM_SkeletonBuild)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Pressure(benchmark::State& state) {
  const UlamSkeleton sk(example(), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sk.pressure(1.0, 2.0, 0.0));
}
BENCHMARK(BM_Pressure)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_TStar(benchmark::State& state) {
  const UlamSkeleton sk(example(), 10);
  for (auto _ : state) benchmark::DoNotOptimize(find_t_star(sk, Side::Plus).t);
}
BENCHMARK(BM_TStar)->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) {
    const SymbolicPoint w = random_point(example().base(), Rng(StreamKey{1, "bench", i++}));
    benchmark::DoNotOptimize(classify_basin(example(), w, 0.1));
  }
}
BENCHMARK(BM_Classify);

void BM_CriticalGraph(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) {
    const SymbolicPoint w = random_point(example().base(), Rng(StreamKey{1, "bench", i++}));
    benchmark::DoNotOptimize(critical_graph(example(), w));
  }
}
BENCHMARK(BM_CriticalGraph)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
