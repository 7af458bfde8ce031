// Serial reference kernels against the blocked OpenMP ones.
//
//   ./chargroup_bench --benchmark_filter=Knn
//
// The second benchmark argument is the worker count for the parallel kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "chargroup/affinity_graph.hpp"
#include "chargroup/feature_refine.hpp"
#include "chargroup/parallel.hpp"
#include "chargroup/reference.hpp"

using namespace chargroup;

namespace {

FeatureMatrix unit_rows(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(n * 131 + d);
  std::normal_distribution<double> g;
  FeatureMatrix m(n, d);
  for (auto& v : m.data()) v = g(rng);
  return normalized_rows(m);
}

constexpr std::size_t kDim = 128;
constexpr std::size_t kK = 20;

void BM_KnnReference(benchmark::State& state) {
  const auto x = unit_rows(static_cast<std::size_t>(state.range(0)), kDim);
  for (auto _ : state) benchmark::DoNotOptimize(reference::build_knn_graph(x, kK));
  state.SetComplexityN(state.range(0));
}

void BM_KnnBlocked(benchmark::State& state) {
  const auto x = unit_rows(static_cast<std::size_t>(state.range(0)), kDim);
  set_worker_count(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(build_knn_graph(x, kK));
  state.SetComplexityN(state.range(0));
}

void BM_CyclicReference(benchmark::State& state) {
  const auto g = build_knn_graph(unit_rows(static_cast<std::size_t>(state.range(0)), kDim), kK);
  for (auto _ : state) benchmark::DoNotOptimize(reference::cyclic_match(g, kK));
}

void BM_CyclicParallel(benchmark::State& state) {
  const auto g = build_knn_graph(unit_rows(static_cast<std::size_t>(state.range(0)), kDim), kK);
  set_worker_count(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(cyclic_match(g, kK));
}

void BM_RefineReference(benchmark::State& state) {
  const auto x = unit_rows(static_cast<std::size_t>(state.range(0)), kDim);
  const auto g = cyclic_match(build_knn_graph(x, kK), kK);
  const FeatureCache cache{x, 0};
  for (auto _ : state) benchmark::DoNotOptimize(reference::refine_features(cache, g));
}

void BM_RefineParallel(benchmark::State& state) {
  const auto x = unit_rows(static_cast<std::size_t>(state.range(0)), kDim);
  const auto g = cyclic_match(build_knn_graph(x, kK), kK);
  const FeatureCache cache{x, 0};
  set_worker_count(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(refine_features(cache, g));
}

}  // namespace

BENCHMARK(BM_KnnReference)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnBlocked)->ArgsProduct({{1000, 4000, 16000}, {1, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CyclicReference)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CyclicParallel)->ArgsProduct({{4000, 16000}, {1, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RefineReference)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RefineParallel)->ArgsProduct({{4000, 16000}, {1, 4}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
