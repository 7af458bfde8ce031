#pragma once

// Serial, straightforward versions of the parallel kernels. They are kept
// for tests and for the kernel benchmark; production code paths never call
// them.

#include "chargroup/affinity_graph.hpp"
#include "chargroup/feature_refine.hpp"

namespace chargroup::reference {

// Full sort of every row of the cosine similarity matrix.
AffinityGraph build_knn_graph(const FeatureMatrix& embeddings, std::size_t k);

// Looks ranks up with AffinityGraph::rank_of for every edge.
AffinityGraph cyclic_match(const AffinityGraph& graph, std::size_t rank_threshold);

FeatureCache refine_features(const FeatureCache& cache, const AffinityGraph& graph, std::size_t passes = 1);

}  // namespace chargroup::reference
