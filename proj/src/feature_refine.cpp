#include "chargroup/feature_refine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chargroup {

namespace {

double norm_of(std::span<const double> v) {
  double sq = 0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

double cosine(std::span<const double> a, std::span<const double> b, double norm_a, double norm_b) {
  if (norm_a == 0 || norm_b == 0) return 0;
  double dot = 0;
  for (std::size_t t = 0; t < a.size(); ++t) dot += a[t] * b[t];
  return std::clamp(dot / (norm_a * norm_b), -1.0, 1.0);
}

void weights_into(const FeatureMatrix& f, const std::vector<double>& norms, const AffinityGraph& g,
                  std::size_t i, std::vector<double>& w) {
  const auto list = g.neighbors(i);
  w.resize(list.size());
  if (list.empty()) return;
  // exp(-d) with d in [0,2]; shift by the smallest distance for stability.
  double d_min = 2;
  for (std::size_t p = 0; p < list.size(); ++p) {
    const auto j = static_cast<std::size_t>(list[p].id);
    w[p] = 1.0 - cosine(f.row(i), f.row(j), norms[i], norms[j]);
    d_min = std::min(d_min, w[p]);
  }
  double total = 0;
  for (double& x : w) {
    x = std::exp(-(x - d_min));
    total += x;
  }
  for (double& x : w) x /= total;
}

void check_sizes(const FeatureMatrix& f, const AffinityGraph& g) {
  if (f.rows() != g.size())
    throw std::invalid_argument("refine_features: cache has " + std::to_string(f.rows()) + " rows but graph has " +
                                std::to_string(g.size()) + " nodes");
}

}  // namespace

std::vector<double> refinement_weights(const FeatureMatrix& features, const AffinityGraph& graph, std::size_t node) {
  check_sizes(features, graph);
  std::vector<double> norms(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) norms[i] = norm_of(features.row(i));
  std::vector<double> w;
  weights_into(features, norms, graph, node, w);
  return w;
}

FeatureCache refine_features(const FeatureCache& cache, const AffinityGraph& graph, std::size_t passes) {
  check_sizes(cache.features, graph);
  FeatureCache current = cache;
  const std::size_t n = graph.size();
  const std::size_t d = cache.features.cols();
  const auto ni = static_cast<std::ptrdiff_t>(n);
  std::vector<double> norms(n);

  for (std::size_t pass = 0; pass < passes; ++pass) {
    const FeatureMatrix& src = current.features;
    FeatureMatrix dst = src;

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < ni; ++s) norms[static_cast<std::size_t>(s)] = norm_of(src.row(static_cast<std::size_t>(s)));

#pragma omp parallel
    {
      std::vector<double> w;
#pragma omp for schedule(static)
      for (std::ptrdiff_t s = 0; s < ni; ++s) {
        const auto i = static_cast<std::size_t>(s);
        weights_into(src, norms, graph, i, w);
        auto out = dst.row(i);
        const auto list = graph.neighbors(i);
        for (std::size_t p = 0; p < list.size(); ++p) {
          const auto fj = src.row(static_cast<std::size_t>(list[p].id));
          for (std::size_t t = 0; t < d; ++t) out[t] += w[p] * fj[t];
        }
      }
    }
    current.features = std::move(dst);
    ++current.generation;
  }
  return current;
}

}  // namespace chargroup
