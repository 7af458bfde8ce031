#pragma once

#include <memory>
#include <span>
#include <vector>

#include "chargroup/affinity_graph.hpp"
#include "chargroup/core_model.hpp"

namespace chargroup {

// All clusterers label rows 0..n-1 unless `ids` supplies observation ids.
// Cluster ids are dense in order of first appearance.

struct KMeansResult {
  ClusterAssignment assignment;
  FeatureMatrix centroids;
  double inertia = 0;
  std::size_t iterations = 0;
};

// Lloyd iterations from k-means++ seeding. Features are L2-normalized first
// unless params.normalize is false. Throws std::invalid_argument if
// k_clusters is 0 or exceeds n.
KMeansResult kmeans(const FeatureMatrix& features, const KMeansParams& params, bool normalize = true,
                    std::span<const ObservationId> ids = {});

// Density clustering over cosine distance; a point is core when at least
// min_pts points (itself included) lie within eps. Points are visited in
// ascending row order, so a border point joins the first cluster reaching it.
ClusterAssignment dbscan(const FeatureMatrix& features, const DbscanParams& params,
                         std::span<const ObservationId> ids = {});

struct HacMerge {
  std::size_t a = 0;  // smallest member index of each merged cluster, a < b
  std::size_t b = 0;
  double height = 0;
};

struct HacResult {
  ClusterAssignment assignment;
  std::vector<HacMerge> merges;  // n-1 merges, non-decreasing height
};

// Agglomerative clustering via nearest-neighbor chains. Ward works on
// Euclidean distances of normalized rows, average linkage on cosine distance.
// The tree is cut after n - n_clusters merges, or by applying every merge
// whose height is <= distance_threshold. Exactly one cut criterion must be set.
HacResult hac(const FeatureMatrix& features, const HacParams& params, std::span<const ObservationId> ids = {});

// Connected components over edges with similarity >= threshold (direction ignored).
ClusterAssignment graph_cc(const AffinityGraph& graph, const GraphCCParams& params,
                           std::span<const ObservationId> ids = {});

// Attachment point for clustering backends. The unsupervised backends ignore
// whichever input they do not need.
class ClusteringBackend {
 public:
  virtual ~ClusteringBackend() = default;
  virtual ClusterAssignment cluster(const FeatureMatrix& features, const AffinityGraph& dynamic_graph,
                                    std::span<const ObservationId> ids) const = 0;
};

std::unique_ptr<ClusteringBackend> make_backend(const ModalityPipeline& pipeline);

}  // namespace chargroup
