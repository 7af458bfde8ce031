#pragma once

#include <cstdint>
#include <vector>

#include "chargroup/affinity_graph.hpp"
#include "chargroup/core_model.hpp"

namespace chargroup {

// Cached representations; generation counts refinement passes applied.
struct FeatureCache {
  FeatureMatrix features;
  std::uint64_t generation = 0;
};

// Softmax weights exp(-d_ij) / sum exp(-d_ij) over node i's graph neighbors,
// with d_ij = 1 - cos(f_i, f_j). Empty for a node without neighbors.
std::vector<double> refinement_weights(const FeatureMatrix& features, const AffinityGraph& graph, std::size_t node);

// One synchronous pass per `passes`: row i becomes f_i + sum_j w_ij f_j, all
// rows reading the pre-pass values. Rows are not re-normalized.
// Throws std::invalid_argument when graph and cache sizes differ.
FeatureCache refine_features(const FeatureCache& cache, const AffinityGraph& graph, std::size_t passes = 1);

}  // namespace chargroup
