#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chargroup/core_model.hpp"

namespace chargroup {

enum class Similarity { Cosine };

struct Neighbor {
  std::int32_t id = 0;
  double similarity = 0;

  bool operator==(const Neighbor&) const = default;
};

// Ranked neighbor lists stored CSR-style. Position p in a list is rank p+1.
//
// Invariants: no self-loops, similarities non-increasing within a list (ties by
// ascending id), every list no longer than k_max.
class AffinityGraph {
 public:
  AffinityGraph() = default;

  // Validates the invariants; throws std::invalid_argument when broken.
  static AffinityGraph from_lists(const std::vector<std::vector<Neighbor>>& lists, std::size_t k_max);
  // Trusted constructor for kernels that already produce valid CSR data.
  static AffinityGraph from_csr(std::vector<std::size_t> offsets, std::vector<Neighbor> entries,
                                std::size_t k_max);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t k_max() const { return k_max_; }
  std::size_t num_edges() const { return entries_.size(); }

  std::span<const Neighbor> neighbors(std::size_t i) const {
    return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  // 1-based rank of j in i's list, 0 when absent.
  std::size_t rank_of(std::size_t i, std::size_t j) const;
  bool has_edge(std::size_t i, std::size_t j) const { return rank_of(i, j) != 0; }

  std::vector<std::vector<Neighbor>> to_lists() const;

  std::chrono::system_clock::time_point built_at() const { return built_at_; }
  double build_seconds() const { return build_seconds_; }
  void set_build_info(std::chrono::system_clock::time_point at, double seconds) {
    built_at_ = at;
    build_seconds_ = seconds;
  }

  // Structural equality; build timing is ignored.
  bool operator==(const AffinityGraph& o) const {
    return k_max_ == o.k_max_ && offsets_ == o.offsets_ && entries_ == o.entries_;
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> entries_;
  std::size_t k_max_ = 0;
  std::chrono::system_clock::time_point built_at_{};
  double build_seconds_ = 0;
};

// Exact top-k neighbors by cosine similarity; each node gets min(k, n-1).
// Throws std::invalid_argument on empty input, k == 0, or a zero-norm row.
AffinityGraph build_knn_graph(const FeatureMatrix& embeddings, std::size_t k,
                              Similarity similarity = Similarity::Cosine);

// Mutual-rank pruning: edge i->j survives iff j ranks within rank_threshold
// of i's list and i ranks within rank_threshold of j's list. Ranks come from
// the input lists; similarities are carried over unchanged. With `fixpoint`
// the pass is repeated on the pruned graph until nothing changes.
AffinityGraph cyclic_match(const AffinityGraph& graph, std::size_t rank_threshold, bool fixpoint = false);

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;  // directed
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  double mean_degree = 0;
  std::chrono::system_clock::time_point built_at{};
  double build_seconds = 0;
};

GraphStats graph_stats(const AffinityGraph& graph);

// {"nodes": n, "k_max": k, "neighbors": [[[id, sim], ...], ...]}
std::string graph_to_json(const AffinityGraph& graph);
AffinityGraph graph_from_json(const std::string& text);

// Returns L2-normalized copy; throws std::invalid_argument on a zero row.
FeatureMatrix normalized_rows(const FeatureMatrix& m);

}  // namespace chargroup
