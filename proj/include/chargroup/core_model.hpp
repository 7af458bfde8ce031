#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chargroup {

using ObservationId = std::int64_t;

enum class Modality { Face, Body, Voice };

inline constexpr std::size_t kModalityCount = 3;
inline constexpr Modality kAllModalities[] = {Modality::Face, Modality::Body, Modality::Voice};

std::string_view to_string(Modality m);
std::optional<Modality> parse_modality(std::string_view s);

inline bool is_visual(Modality m) { return m != Modality::Voice; }
inline std::size_t index_of(Modality m) { return static_cast<std::size_t>(m); }

// Malformed input data (bad record, broken invariant, coverage mismatch).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unparseable or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation requested on data that carries no ground truth.
class MissingGroundTruth : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pixel box given by its upper-left and lower-right corners.
struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  bool valid() const;
  bool operator==(const BBox&) const = default;
};

// Seconds on the shared video time axis.
struct TimeInterval {
  double start = 0, end = 0;

  bool valid() const;
  double length() const { return end - start; }
  bool operator==(const TimeInterval&) const = default;
};

struct ObservationRecord {
  ObservationId id = 0;
  Modality modality = Modality::Face;
  std::vector<double> embedding;
  std::int64_t shot_id = 0;
  std::optional<std::int64_t> frame_id;  // visual only
  std::optional<BBox> bbox;              // visual only
  TimeInterval interval;
  std::optional<std::string> gt_label;
  // Absent in the file means "fully confident"; kept optional so files round-trip.
  std::optional<double> confidence;

  double confidence_or_default() const { return confidence.value_or(1.0); }
};

using Dataset = std::vector<ObservationRecord>;

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate_dataset(std::span<const ObservationRecord> records);

// Records of one modality, in dataset order.
std::vector<const ObservationRecord*> select(std::span<const ObservationRecord> records,
                                             Modality m);

bool has_ground_truth(std::span<const ObservationRecord> records);

// Dense row-major matrix of embeddings.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static FeatureMatrix from_records(std::span<const ObservationRecord* const> records);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Unified label space: identity strings of each modality get disjoint
// contiguous integer ranges (face 1..F, body F+1..F+B, voice F+B+1..F+B+V).
class LabelSpace {
 public:
  static LabelSpace build(std::span<const ObservationRecord> records);

  std::size_t count(Modality m) const { return labels_[index_of(m)].size(); }
  std::size_t total() const;
  // First global id of the modality's range.
  std::int64_t offset(Modality m) const;
  std::optional<std::int64_t> global_id(Modality m, const std::string& label) const;

 private:
  std::map<std::string, std::int64_t> labels_[kModalityCount];  // label -> local id (1-based)
};

inline constexpr std::int32_t kNoise = -1;

// Observation id -> cluster id. Cluster ids are dense 0..C-1; kNoise marks
// points a density clusterer left unassigned.
class ClusterAssignment {
 public:
  ClusterAssignment() = default;

  // Relabels arbitrary labels densely in order of first appearance; negative
  // labels become kNoise.
  static ClusterAssignment from_labels(std::vector<ObservationId> ids,
                                       std::span<const std::int64_t> labels);
  // Takes labels that are already dense.
  static ClusterAssignment from_dense(std::vector<ObservationId> ids,
                                      std::vector<std::int32_t> labels);

  std::size_t size() const { return ids_.size(); }
  std::size_t num_clusters() const { return num_clusters_; }
  std::size_t num_noise() const;

  const std::vector<ObservationId>& ids() const { return ids_; }
  const std::vector<std::int32_t>& labels() const { return labels_; }

  std::optional<std::int32_t> cluster_of(ObservationId id) const;
  bool contains(ObservationId id) const { return index_.count(id) != 0; }

  // Every noise point becomes its own cluster appended after the existing ids.
  ClusterAssignment with_noise_as_singletons() const;

  std::vector<std::vector<ObservationId>> members() const;

  bool operator==(const ClusterAssignment& o) const { return ids_ == o.ids_ && labels_ == o.labels_; }

 private:
  std::vector<ObservationId> ids_;
  std::vector<std::int32_t> labels_;
  std::map<ObservationId, std::size_t> index_;
  std::size_t num_clusters_ = 0;

  void rebuild_index();
};

struct TimelineEntry {
  std::int64_t shot_id = 0;
  TimeInterval interval;
  std::vector<Modality> sources;  // sorted, unique
  std::vector<ObservationId> observation_ids;  // sorted
};

struct CharacterTimeline {
  std::int32_t character_id = 0;
  std::vector<TimelineEntry> entries;  // sorted by start, non-overlapping
};

enum class ClustererKind { KMeans, DBSCAN, HAC, GraphCC };

std::string_view to_string(ClustererKind k);
std::optional<ClustererKind> parse_clusterer(std::string_view s);

enum class HacLinkage { Ward, Average };

struct KMeansParams {
  std::size_t k_clusters = 0;  // 0 = not configured
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::size_t n_init = 10;
  std::uint64_t seed = 0;
};

struct DbscanParams {
  double eps = 0.3;  // cosine distance
  std::size_t min_pts = 3;
};

struct HacParams {
  HacLinkage linkage = HacLinkage::Average;
  std::optional<std::size_t> n_clusters;
  std::optional<double> distance_threshold;
};

struct GraphCCParams {
  double similarity_threshold = 0.5;
};

// Everything needed to turn one modality's embeddings into clusters.
struct ModalityPipeline {
  std::size_t k = 20;
  std::size_t rank_threshold = 20;
  bool cyclic_fixpoint = false;
  bool refinement_enabled = true;
  std::size_t refine_passes = 1;
  ClustererKind clusterer = ClustererKind::KMeans;
  KMeansParams kmeans;
  DbscanParams dbscan;
  HacParams hac;
  GraphCCParams graph_cc;
};

struct FusionParams {
  double tau_spatial = 0.5;
  double tau_temporal = 0.5;
  double voice_confidence_min = 0.7;
  bool temporal_iou_normalized = false;
};

struct PipelineConfig {
  ModalityPipeline modality[kModalityCount];
  FusionParams fusion;
  std::uint64_t seed = 0;

  const ModalityPipeline& of(Modality m) const { return modality[index_of(m)]; }
  ModalityPipeline& of(Modality m) { return modality[index_of(m)]; }

  // Throws ConfigError on broken invariants (rank_threshold > k, ranges).
  void validate() const;
};

}  // namespace chargroup
