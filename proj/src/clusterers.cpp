#include "chargroup/clusterers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "chargroup/union_find.hpp"

namespace chargroup {

namespace {

std::vector<ObservationId> resolve_ids(std::span<const ObservationId> ids, std::size_t n) {
  if (ids.empty()) {
    std::vector<ObservationId> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<ObservationId>(i);
    return out;
  }
  if (ids.size() != n) throw std::invalid_argument("ids do not match feature rows");
  return {ids.begin(), ids.end()};
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double diff = a[t] - b[t];
    s += diff * diff;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
  return s;
}

// ---------------------------------------------------------------- k-means

struct LloydRun {
  std::vector<std::int64_t> labels;
  FeatureMatrix centroids;
  double inertia = 0;
  std::size_t iterations = 0;
};

FeatureMatrix kmeanspp_seed(const FeatureMatrix& x, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = x.rows();
  FeatureMatrix c(k, x.cols());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t first = pick(rng);
  std::copy(x.row(first).begin(), x.row(first).end(), c.row(0).begin());

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), c.row(0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t m = 1; m < k; ++m) {
    double total = 0;
    for (double v : d2) total += v;
    std::size_t chosen = n - 1;
    if (total > 0) {
      const double target = unit(rng) * total;
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    std::copy(x.row(chosen).begin(), x.row(chosen).end(), c.row(m).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x.row(i), c.row(m)));
  }
  return c;
}

void assign_nearest(const FeatureMatrix& x, const FeatureMatrix& c, std::vector<std::int64_t>& labels,
                    std::vector<double>& dist) {
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const auto i = static_cast<std::size_t>(s);
    double best = std::numeric_limits<double>::infinity();
    std::int64_t arg = 0;
    for (std::size_t m = 0; m < c.rows(); ++m) {
      const double d = squared_distance(x.row(i), c.row(m));
      if (d < best) {
        best = d;
        arg = static_cast<std::int64_t>(m);
      }
    }
    labels[i] = arg;
    dist[i] = best;
  }
}

LloydRun lloyd(const FeatureMatrix& x, std::size_t k, const KMeansParams& p, std::mt19937_64& rng) {
  const std::size_t n = x.rows(), d = x.cols();
  LloydRun run;
  run.centroids = kmeanspp_seed(x, k, rng);
  run.labels.assign(n, 0);
  std::vector<double> dist(n);
  for (run.iterations = 1; run.iterations <= p.max_iter; ++run.iterations) {
    assign_nearest(x, run.centroids, run.labels, dist);
    FeatureMatrix next(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto m = static_cast<std::size_t>(run.labels[i]);
      ++counts[m];
      auto row = next.row(m);
      const auto xi = x.row(i);
      for (std::size_t t = 0; t < d; ++t) row[t] += xi[t];
    }
    double shift = 0;
    for (std::size_t m = 0; m < k; ++m) {
      auto row = next.row(m);
      if (counts[m] == 0) {
        // Empty cluster keeps its previous centroid.
        std::copy(run.centroids.row(m).begin(), run.centroids.row(m).end(), row.begin());
        continue;
      }
      for (double& v : row) v /= static_cast<double>(counts[m]);
      shift = std::max(shift, std::sqrt(squared_distance(row, run.centroids.row(m))));
    }
    run.centroids = std::move(next);
    if (shift < p.tol) break;
  }
  run.iterations = std::min(run.iterations, p.max_iter);
  assign_nearest(x, run.centroids, run.labels, dist);
  run.inertia = 0;
  for (double v : dist) run.inertia += v;
  return run;
}

// ------------------------------------------------------------- HAC helpers

// Condensed upper-triangular distance storage.
class Condensed {
 public:
  explicit Condensed(std::size_t n) : n_(n), d_(n * (n - 1) / 2) {}
  double& at(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return d_[index(i, j)];
  }

 private:
  std::size_t index(std::size_t i, std::size_t j) const { return n_ * i - i * (i + 1) / 2 + (j - i - 1); }
  std::size_t n_;
  std::vector<double> d_;
};

}  // namespace

KMeansResult kmeans(const FeatureMatrix& features, const KMeansParams& params, bool normalize,
                    std::span<const ObservationId> ids) {
  const std::size_t n = features.rows();
  if (params.k_clusters == 0) throw std::invalid_argument("kmeans: k_clusters must be positive");
  if (params.k_clusters > n)
    throw std::invalid_argument("kmeans: k_clusters (" + std::to_string(params.k_clusters) + ") exceeds point count (" +
                                std::to_string(n) + ")");
  auto id_list = resolve_ids(ids, n);
  const FeatureMatrix x = normalize ? normalized_rows(features) : features;

  LloydRun best;
  bool have = false;
  for (std::size_t init = 0; init < std::max<std::size_t>(1, params.n_init); ++init) {
    std::mt19937_64 rng(params.seed + 0x9E3779B97F4A7C15ULL * init);
    LloydRun run = lloyd(x, params.k_clusters, params, rng);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  KMeansResult out;
  out.assignment = ClusterAssignment::from_labels(std::move(id_list), best.labels);
  out.centroids = std::move(best.centroids);
  out.inertia = best.inertia;
  out.iterations = best.iterations;
  return out;
}

ClusterAssignment dbscan(const FeatureMatrix& features, const DbscanParams& params,
                         std::span<const ObservationId> ids) {
  const std::size_t n = features.rows();
  auto id_list = resolve_ids(ids, n);
  if (n == 0) return ClusterAssignment::from_labels({}, std::span<const std::int64_t>{});
  const FeatureMatrix x = normalized_rows(features);
  const auto ni = static_cast<std::ptrdiff_t>(n);

  // Region queries, self included.
  std::vector<std::vector<std::uint32_t>> region(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t s = 0; s < ni; ++s) {
    const auto i = static_cast<std::size_t>(s);
    for (std::size_t j = 0; j < n; ++j) {
      const double dist = 1.0 - std::clamp(dot(x.row(i), x.row(j)), -1.0, 1.0);
      if (j == i || dist <= params.eps) region[i].push_back(static_cast<std::uint32_t>(j));
    }
  }

  constexpr std::int64_t kUnvisited = -2;
  std::vector<std::int64_t> label(n, kUnvisited);
  std::int64_t next_cluster = 0;
  std::vector<std::uint32_t> queue;
  for (std::size_t p = 0; p < n; ++p) {
    if (label[p] != kUnvisited) continue;
    if (region[p].size() < params.min_pts) {
      label[p] = kNoise;
      continue;
    }
    const std::int64_t c = next_cluster++;
    label[p] = c;
    queue.assign(region[p].begin(), region[p].end());
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::uint32_t q = queue[head];
      if (label[q] == kNoise) label[q] = c;
      if (label[q] != kUnvisited) continue;
      label[q] = c;
      if (region[q].size() >= params.min_pts) queue.insert(queue.end(), region[q].begin(), region[q].end());
    }
  }
  return ClusterAssignment::from_labels(std::move(id_list), label);
}

HacResult hac(const FeatureMatrix& features, const HacParams& params, std::span<const ObservationId> ids) {
  const std::size_t n = features.rows();
  if (n == 0) throw std::invalid_argument("hac: no points");
  if (params.n_clusters.has_value() == params.distance_threshold.has_value())
    throw std::invalid_argument("hac: set exactly one of n_clusters or distance_threshold");
  if (params.n_clusters && (*params.n_clusters == 0 || *params.n_clusters > n))
    throw std::invalid_argument("hac: n_clusters must lie in [1, n]");
  auto id_list = resolve_ids(ids, n);
  const FeatureMatrix x = normalized_rows(features);
  const bool ward = params.linkage == HacLinkage::Ward;

  // Ward keeps squared distances so the Lance-Williams update is exact.
  Condensed dist(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist.at(i, j) = ward ? squared_distance(x.row(i), x.row(j))
                           : 1.0 - std::clamp(dot(x.row(i), x.row(j)), -1.0, 1.0);

  std::vector<std::size_t> size(n, 1), rep(n);
  std::vector<bool> active(n, true);
  for (std::size_t i = 0; i < n; ++i) rep[i] = i;

  struct Raw {
    std::size_t a, b;
    double key;
  };
  std::vector<Raw> raw;
  raw.reserve(n - 1);
  std::vector<std::size_t> chain;
  std::size_t remaining = n;
  while (remaining > 1) {
    if (chain.empty())
      for (std::size_t i = 0; i < n; ++i)
        if (active[i]) {
          chain.push_back(i);
          break;
        }
    const std::size_t a = chain.back();
    const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : n;
    std::size_t b = n;
    double best = std::numeric_limits<double>::infinity();
    if (prev != n) {
      b = prev;
      best = dist.at(a, prev);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a) continue;
      const double v = dist.at(a, j);
      if (v < best || (v == best && j < b && b != prev)) {
        best = v;
        b = j;
      }
    }
    if (b == prev) {
      chain.pop_back();
      chain.pop_back();
      // Merge a and b into the lower slot.
      const std::size_t keep = std::min(a, b), gone = std::max(a, b);
      raw.push_back({rep[a], rep[b], best});
      const double d_ab = best;
      for (std::size_t k = 0; k < n; ++k) {
        if (!active[k] || k == a || k == b) continue;
        const double da = dist.at(k, a), db = dist.at(k, b);
        const auto na = static_cast<double>(size[a]), nb = static_cast<double>(size[b]),
                   nk = static_cast<double>(size[k]);
        dist.at(k, keep) = ward ? ((na + nk) * da + (nb + nk) * db - nk * d_ab) / (na + nb + nk)
                                : (na * da + nb * db) / (na + nb);
      }
      size[keep] = size[a] + size[b];
      rep[keep] = std::min(rep[a], rep[b]);
      active[gone] = false;
      --remaining;
    } else {
      chain.push_back(b);
    }
  }

  std::stable_sort(raw.begin(), raw.end(), [](const Raw& l, const Raw& r) { return l.key < r.key; });

  HacResult result;
  UnionFind uf(n);
  std::vector<std::size_t> smallest(n);
  for (std::size_t i = 0; i < n; ++i) smallest[i] = i;
  const std::size_t cut_merges = params.n_clusters ? n - *params.n_clusters : n;
  std::size_t applied = 0;
  UnionFind cut(n);
  for (const auto& m : raw) {
    const std::size_t ra = uf.find(m.a), rb = uf.find(m.b);
    const std::size_t sa = smallest[ra], sb = smallest[rb];
    uf.unite(ra, rb);
    smallest[uf.find(ra)] = std::min(sa, sb);
    const double height = ward ? std::sqrt(std::max(0.0, m.key)) : m.key;
    result.merges.push_back({std::min(sa, sb), std::max(sa, sb), height});

    const bool take = params.n_clusters ? applied < cut_merges : height <= *params.distance_threshold;
    if (take) {
      cut.unite(m.a, m.b);
      ++applied;
    }
  }
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::int64_t>(cut.find(i));
  result.assignment = ClusterAssignment::from_labels(std::move(id_list), labels);
  return result;
}

ClusterAssignment graph_cc(const AffinityGraph& graph, const GraphCCParams& params,
                           std::span<const ObservationId> ids) {
  const std::size_t n = graph.size();
  auto id_list = resolve_ids(ids, n);
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& nb : graph.neighbors(i))
      if (nb.similarity >= params.similarity_threshold) uf.unite(i, static_cast<std::size_t>(nb.id));
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::int64_t>(uf.find(i));
  return ClusterAssignment::from_labels(std::move(id_list), labels);
}

namespace {

class KMeansBackend final : public ClusteringBackend {
 public:
  explicit KMeansBackend(KMeansParams p) : p_(p) {}
  ClusterAssignment cluster(const FeatureMatrix& f, const AffinityGraph&, std::span<const ObservationId> ids) const override {
    return kmeans(f, p_, true, ids).assignment;
  }

 private:
  KMeansParams p_;
};

class DbscanBackend final : public ClusteringBackend {
 public:
  explicit DbscanBackend(DbscanParams p) : p_(p) {}
  ClusterAssignment cluster(const FeatureMatrix& f, const AffinityGraph&, std::span<const ObservationId> ids) const override {
    return dbscan(f, p_, ids);
  }

 private:
  DbscanParams p_;
};

class HacBackend final : public ClusteringBackend {
 public:
  explicit HacBackend(HacParams p) : p_(p) {}
  ClusterAssignment cluster(const FeatureMatrix& f, const AffinityGraph&, std::span<const ObservationId> ids) const override {
    return hac(f, p_, ids).assignment;
  }

 private:
  HacParams p_;
};

class GraphCCBackend final : public ClusteringBackend {
 public:
  explicit GraphCCBackend(GraphCCParams p) : p_(p) {}
  ClusterAssignment cluster(const FeatureMatrix&, const AffinityGraph& g, std::span<const ObservationId> ids) const override {
    return graph_cc(g, p_, ids);
  }

 private:
  GraphCCParams p_;
};

}  // namespace

std::unique_ptr<ClusteringBackend> make_backend(const ModalityPipeline& pipeline) {
  switch (pipeline.clusterer) {
    case ClustererKind::KMeans: return std::make_unique<KMeansBackend>(pipeline.kmeans);
    case ClustererKind::DBSCAN: return std::make_unique<DbscanBackend>(pipeline.dbscan);
    case ClustererKind::HAC: return std::make_unique<HacBackend>(pipeline.hac);
    case ClustererKind::GraphCC: return std::make_unique<GraphCCBackend>(pipeline.graph_cc);
  }
  throw std::invalid_argument("unknown clusterer");
}

}  // namespace chargroup
