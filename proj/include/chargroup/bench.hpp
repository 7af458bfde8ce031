#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace chargroup {

struct GraphBenchRow {
  std::size_t n = 0;
  double t_knn_ms = 0;
  double t_cyclic_ms = 0;
};

struct GraphBenchOptions {
  std::vector<std::size_t> n_list;
  std::size_t d = 128;
  std::size_t k = 20;
  std::size_t rank_threshold = 0;  // 0 = k
  std::uint64_t seed = 0;
};

// Times k-NN construction and cyclic matching on random unit vectors for each
// n. A small warm-up build runs first and is not reported. Uses the current
// worker count.
std::vector<GraphBenchRow> bench_graph_build(const GraphBenchOptions& opts);

// "n,t_knn_ms,t_cyclic_ms" header plus one line per row.
std::string bench_to_csv(const std::vector<GraphBenchRow>& rows);

}  // namespace chargroup
