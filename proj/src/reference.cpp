#include "chargroup/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace chargroup::reference {

namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    dot += a[t] * b[t];
    na += a[t] * a[t];
    nb += b[t] * b[t];
  }
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace

AffinityGraph build_knn_graph(const FeatureMatrix& embeddings, std::size_t k) {
  const std::size_t n = embeddings.rows();
  if (n == 0 || k == 0) throw std::invalid_argument("reference::build_knn_graph: empty input or k == 0");
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0;
    for (double v : embeddings.row(i)) sq += v * v;
    if (sq == 0) throw std::invalid_argument("zero-norm row " + std::to_string(i));
  }
  std::vector<std::vector<Neighbor>> lists(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Neighbor> all;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) all.push_back({static_cast<std::int32_t>(j), cosine(embeddings.row(i), embeddings.row(j))});
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
    });
    all.resize(std::min(k, all.size()));
    lists[i] = std::move(all);
  }
  return AffinityGraph::from_lists(lists, k);
}

AffinityGraph cyclic_match(const AffinityGraph& graph, std::size_t rank_threshold) {
  std::vector<std::vector<Neighbor>> lists(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (const auto& nb : graph.neighbors(i)) {
      const auto j = static_cast<std::size_t>(nb.id);
      const std::size_t r_ij = graph.rank_of(i, j);
      const std::size_t r_ji = graph.rank_of(j, i);
      if (r_ij != 0 && r_ij <= rank_threshold && r_ji != 0 && r_ji <= rank_threshold) lists[i].push_back(nb);
    }
  }
  return AffinityGraph::from_lists(lists, graph.k_max());
}

FeatureCache refine_features(const FeatureCache& cache, const AffinityGraph& graph, std::size_t passes) {
  if (cache.features.rows() != graph.size()) throw std::invalid_argument("reference::refine_features: size mismatch");
  FeatureCache cur = cache;
  for (std::size_t pass = 0; pass < passes; ++pass) {
    FeatureMatrix next = cur.features;
    for (std::size_t i = 0; i < graph.size(); ++i) {
      const auto list = graph.neighbors(i);
      if (list.empty()) continue;
      std::vector<double> e(list.size());
      for (std::size_t p = 0; p < list.size(); ++p)
        e[p] = std::exp(-(1.0 - cosine(cur.features.row(i), cur.features.row(static_cast<std::size_t>(list[p].id)))));
      const double total = std::accumulate(e.begin(), e.end(), 0.0);
      for (std::size_t p = 0; p < list.size(); ++p) {
        const auto fj = cur.features.row(static_cast<std::size_t>(list[p].id));
        for (std::size_t t = 0; t < fj.size(); ++t) next(i, t) += e[p] / total * fj[t];
      }
    }
    cur.features = std::move(next);
    ++cur.generation;
  }
  return cur;
}

}  // namespace chargroup::reference
