#include "chargroup/affinity_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace chargroup {

AffinityGraph AffinityGraph::from_lists(const std::vector<std::vector<Neighbor>>& lists, std::size_t k_max) {
  const std::size_t n = lists.size();
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<Neighbor> entries;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& list = lists[i];
    if (list.size() > k_max) throw std::invalid_argument("neighbor list of node " + std::to_string(i) + " exceeds k_max");
    for (std::size_t p = 0; p < list.size(); ++p) {
      const auto& nb = list[p];
      if (nb.id < 0 || static_cast<std::size_t>(nb.id) >= n)
        throw std::invalid_argument("neighbor id out of range at node " + std::to_string(i));
      if (static_cast<std::size_t>(nb.id) == i) throw std::invalid_argument("self-loop at node " + std::to_string(i));
      if (!std::isfinite(nb.similarity) || nb.similarity < -1 || nb.similarity > 1)
        throw std::invalid_argument("similarity outside [-1,1] at node " + std::to_string(i));
      if (p > 0) {
        const auto& prev = list[p - 1];
        if (prev.similarity < nb.similarity || (prev.similarity == nb.similarity && prev.id >= nb.id))
          throw std::invalid_argument("neighbor list of node " + std::to_string(i) + " is not rank-ordered");
      }
      entries.push_back(nb);
    }
    offsets[i + 1] = entries.size();
  }
  return from_csr(std::move(offsets), std::move(entries), k_max);
}

AffinityGraph AffinityGraph::from_csr(std::vector<std::size_t> offsets, std::vector<Neighbor> entries,
                                      std::size_t k_max) {
  AffinityGraph g;
  g.offsets_ = std::move(offsets);
  g.entries_ = std::move(entries);
  g.k_max_ = k_max;
  return g;
}

std::size_t AffinityGraph::rank_of(std::size_t i, std::size_t j) const {
  const auto list = neighbors(i);
  for (std::size_t p = 0; p < list.size(); ++p)
    if (static_cast<std::size_t>(list[p].id) == j) return p + 1;
  return 0;
}

std::vector<std::vector<Neighbor>> AffinityGraph::to_lists() const {
  std::vector<std::vector<Neighbor>> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto list = neighbors(i);
    out[i].assign(list.begin(), list.end());
  }
  return out;
}

namespace {

bool ranks_within(const AffinityGraph& g, std::size_t node, std::size_t target, std::size_t r) {
  const auto list = g.neighbors(node);
  const std::size_t limit = std::min(r, list.size());
  for (std::size_t p = 0; p < limit; ++p)
    if (static_cast<std::size_t>(list[p].id) == target) return true;
  return false;
}

AffinityGraph cyclic_match_once(const AffinityGraph& graph, std::size_t r) {
  const std::size_t n = graph.size();
  const auto ni = static_cast<std::ptrdiff_t>(n);
  std::vector<std::size_t> kept(n, 0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < ni; ++s) {
    const auto i = static_cast<std::size_t>(s);
    const auto list = graph.neighbors(i);
    const std::size_t limit = std::min(r, list.size());
    std::size_t c = 0;
    for (std::size_t p = 0; p < limit; ++p)
      if (ranks_within(graph, static_cast<std::size_t>(list[p].id), i, r)) ++c;
    kept[i] = c;
  }

  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + kept[i];
  std::vector<Neighbor> entries(offsets[n]);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < ni; ++s) {
    const auto i = static_cast<std::size_t>(s);
    const auto list = graph.neighbors(i);
    const std::size_t limit = std::min(r, list.size());
    std::size_t out = offsets[i];
    for (std::size_t p = 0; p < limit; ++p)
      if (ranks_within(graph, static_cast<std::size_t>(list[p].id), i, r)) entries[out++] = list[p];
  }
  return AffinityGraph::from_csr(std::move(offsets), std::move(entries), graph.k_max());
}

}  // namespace

AffinityGraph cyclic_match(const AffinityGraph& graph, std::size_t rank_threshold, bool fixpoint) {
  if (rank_threshold == 0) throw std::invalid_argument("cyclic_match: rank_threshold must be positive");
  if (rank_threshold > graph.k_max()) throw std::invalid_argument("cyclic_match: rank_threshold exceeds k_max");
  AffinityGraph g = cyclic_match_once(graph, rank_threshold);
  while (fixpoint) {
    AffinityGraph next = cyclic_match_once(g, rank_threshold);
    if (next.num_edges() == g.num_edges()) break;
    g = std::move(next);
  }
  return g;
}

GraphStats graph_stats(const AffinityGraph& graph) {
  GraphStats s;
  s.nodes = graph.size();
  s.edges = graph.num_edges();
  s.built_at = graph.built_at();
  s.build_seconds = graph.build_seconds();
  if (s.nodes == 0) return s;
  s.min_degree = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < s.nodes; ++i) {
    s.min_degree = std::min(s.min_degree, graph.degree(i));
    s.max_degree = std::max(s.max_degree, graph.degree(i));
  }
  s.mean_degree = static_cast<double>(s.edges) / static_cast<double>(s.nodes);
  return s;
}

std::string graph_to_json(const AffinityGraph& graph) {
  nlohmann::ordered_json j;
  j["nodes"] = graph.size();
  j["k_max"] = graph.k_max();
  auto lists = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    auto list = nlohmann::ordered_json::array();
    for (const auto& nb : graph.neighbors(i)) list.push_back({nb.id, nb.similarity});
    lists.push_back(std::move(list));
  }
  j["neighbors"] = std::move(lists);
  return j.dump() + "\n";
}

AffinityGraph graph_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto n = j.at("nodes").get<std::size_t>();
  const auto& arr = j.at("neighbors");
  if (arr.size() != n) throw std::invalid_argument("graph dump: neighbor array length differs from nodes");
  std::vector<std::vector<Neighbor>> lists(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& pair : arr[i]) lists[i].push_back({pair.at(0).get<std::int32_t>(), pair.at(1).get<double>()});
  return AffinityGraph::from_lists(lists, j.at("k_max").get<std::size_t>());
}

}  // namespace chargroup
