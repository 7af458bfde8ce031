#include "chargroup/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "chargroup/affinity_graph.hpp"

namespace chargroup {

namespace {

FeatureMatrix random_unit_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  FeatureMatrix m(n, d);
  for (double& v : m.data()) v = normal(rng);
  return normalized_rows(m);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<GraphBenchRow> bench_graph_build(const GraphBenchOptions& opts) {
  if (opts.k == 0 || opts.d == 0) throw std::invalid_argument("bench: k and d must be positive");
  const std::size_t r = opts.rank_threshold == 0 ? opts.k : opts.rank_threshold;
  {
    const auto warm = random_unit_rows(512, opts.d, opts.seed ^ 0xABCDEFULL);
    (void)cyclic_match(build_knn_graph(warm, opts.k), std::min(r, opts.k));
  }
  std::vector<GraphBenchRow> rows;
  for (std::size_t n : opts.n_list) {
    if (n < 2) throw std::invalid_argument("bench: n must be at least 2");
    const auto x = random_unit_rows(n, opts.d, opts.seed + n);
    auto t0 = std::chrono::steady_clock::now();
    const auto g = build_knn_graph(x, opts.k);
    const double t_knn = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const auto pruned = cyclic_match(g, r);
    const double t_cyc = ms_since(t0);
    if (pruned.num_edges() > g.num_edges()) throw std::logic_error("cyclic_match grew the graph");
    rows.push_back({n, t_knn, t_cyc});
  }
  return rows;
}

std::string bench_to_csv(const std::vector<GraphBenchRow>& rows) {
  std::string out = "n,t_knn_ms,t_cyclic_ms\n";
  char line[128];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%zu,%.3f,%.3f\n", row.n, row.t_knn_ms, row.t_cyclic_ms);
    out += line;
  }
  return out;
}

}  // namespace chargroup
