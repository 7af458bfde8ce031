#pragma once

// Brute-force oracles and random instance generators shared by the unit and
// acceptance tests. Nothing here calls into the library's kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "chargroup/affinity_graph.hpp"
#include "chargroup/core_model.hpp"

namespace oracle {

struct Scores {
  double precision = 0;
  double recall = 0;
  double f = 0;
};

inline bool same_partition(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

inline double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0; }

// Counts over all unordered pairs.
inline Scores pairwise(const std::vector<std::int64_t>& pred, const std::vector<std::int64_t>& truth) {
  if (same_partition(pred, truth)) return {1, 1, 1};
  double tp = 0, pp = 0, tt = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (std::size_t j = i + 1; j < pred.size(); ++j) {
      const bool p = pred[i] == pred[j], t = truth[i] == truth[j];
      tp += p && t;
      pp += p;
      tt += t;
    }
  Scores s;
  s.precision = pp > 0 ? tp / pp : 0;
  s.recall = tt > 0 ? tp / tt : 0;
  s.f = harmonic(s.precision, s.recall);
  return s;
}

// Per-item averages; an item's own pair counts.
inline Scores bcubed(const std::vector<std::int64_t>& pred, const std::vector<std::int64_t>& truth) {
  if (same_partition(pred, truth)) return {1, 1, 1};
  double p_sum = 0, r_sum = 0;
  const std::size_t n = pred.size();
  for (std::size_t i = 0; i < n; ++i) {
    double both = 0, same_pred = 0, same_truth = 0;
    for (std::size_t j = 0; j < n; ++j) {
      both += pred[i] == pred[j] && truth[i] == truth[j];
      same_pred += pred[i] == pred[j];
      same_truth += truth[i] == truth[j];
    }
    p_sum += both / same_pred;
    r_sum += both / same_truth;
  }
  Scores s;
  s.precision = p_sum / static_cast<double>(n);
  s.recall = r_sum / static_cast<double>(n);
  s.f = harmonic(s.precision, s.recall);
  return s;
}

// I(U;V) / sqrt(H(U) H(V)) from explicit probability tables.
inline double nmi(const std::vector<std::int64_t>& pred, const std::vector<std::int64_t>& truth) {
  if (same_partition(pred, truth)) return 1;
  const std::set<std::int64_t> us(pred.begin(), pred.end()), vs(truth.begin(), truth.end());
  const double n = static_cast<double>(pred.size());
  auto prob = [&](const std::vector<std::int64_t>& x, std::int64_t v) {
    return static_cast<double>(std::count(x.begin(), x.end(), v)) / n;
  };
  double hu = 0, hv = 0, mi = 0;
  for (auto u : us) hu -= prob(pred, u) * std::log(prob(pred, u));
  for (auto v : vs) hv -= prob(truth, v) * std::log(prob(truth, v));
  for (auto u : us)
    for (auto v : vs) {
      double joint = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) joint += pred[i] == u && truth[i] == v;
      joint /= n;
      if (joint > 0) mi += joint * std::log(joint / (prob(pred, u) * prob(truth, v)));
    }
  if (hu <= 0 || hv <= 0) return 0;
  return mi / std::sqrt(hu * hv);
}

// Negative predicted labels are singletons: give each a fresh label.
inline std::vector<std::int64_t> noise_to_singletons(std::vector<std::int64_t> labels) {
  std::int64_t next = 1 + *std::max_element(labels.begin(), labels.end());
  for (auto& l : labels)
    if (l < 0) l = next++;
  return labels;
}

// Random labeling of n items with up to c labels.
inline std::vector<std::int64_t> random_labels(std::mt19937_64& rng, std::size_t n, std::size_t c) {
  std::vector<std::int64_t> out(n);
  std::uniform_int_distribution<std::int64_t> pick(0, static_cast<std::int64_t>(c) - 1);
  for (auto& l : out) l = pick(rng);
  return out;
}

// Position of j in i's list, 1-based; 0 when absent. Linear scan.
inline std::size_t rank_in(const std::vector<std::vector<chargroup::Neighbor>>& lists, std::size_t i, std::size_t j) {
  for (std::size_t p = 0; p < lists[i].size(); ++p)
    if (static_cast<std::size_t>(lists[i][p].id) == j) return p + 1;
  return 0;
}

// Mutual-rank filter written out over the raw lists.
inline std::vector<std::vector<chargroup::Neighbor>> mutual_rank(const std::vector<std::vector<chargroup::Neighbor>>& lists,
                                                                std::size_t r) {
  std::vector<std::vector<chargroup::Neighbor>> out(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i)
    for (std::size_t p = 0; p < lists[i].size(); ++p) {
      const auto j = static_cast<std::size_t>(lists[i][p].id);
      const std::size_t back = rank_in(lists, j, i);
      if (p + 1 <= r && back != 0 && back <= r) out[i].push_back(lists[i][p]);
    }
  return out;
}

// Random valid neighbor lists: n nodes, up to k_max neighbors each, a few
// exactly tied similarities, sorted by (similarity desc, id asc).
inline std::vector<std::vector<chargroup::Neighbor>> random_lists(std::mt19937_64& rng, std::size_t n,
                                                                  std::size_t k_max) {
  std::vector<std::vector<chargroup::Neighbor>> lists(n);
  std::uniform_real_distribution<double> sim(-1, 1);
  std::uniform_int_distribution<std::size_t> deg(0, std::min(k_max, n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::int32_t> pool;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) pool.push_back(static_cast<std::int32_t>(j));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(deg(rng));
    for (auto j : pool) {
      double s = sim(rng);
      if (!lists[i].empty() && rng() % 5 == 0) s = lists[i].back().similarity;
      lists[i].push_back({j, s});
    }
    std::sort(lists[i].begin(), lists[i].end(), [](const auto& a, const auto& b) {
      return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
    });
  }
  return lists;
}

inline chargroup::FeatureMatrix random_features(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& r : rows)
    for (auto& v : r) v = g(rng);
  return chargroup::FeatureMatrix::from_rows(rows);
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    ab += static_cast<long double>(a[t]) * b[t];
    aa += static_cast<long double>(a[t]) * a[t];
    bb += static_cast<long double>(b[t]) * b[t];
  }
  return static_cast<double>(ab / std::sqrt(aa * bb));
}

// Top-k by extended-precision cosine, ties by ascending id.
inline std::vector<std::vector<chargroup::Neighbor>> brute_knn(const chargroup::FeatureMatrix& x, std::size_t k) {
  const std::size_t n = x.rows();
  std::vector<std::vector<chargroup::Neighbor>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<chargroup::Neighbor> all;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) all.push_back({static_cast<std::int32_t>(j), cosine(x.row(i), x.row(j))});
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
    });
    all.resize(std::min(k, all.size()));
    out[i] = std::move(all);
  }
  return out;
}

}  // namespace oracle
