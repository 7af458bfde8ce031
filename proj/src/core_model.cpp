#include "chargroup/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace chargroup {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Face: return "face";
    case Modality::Body: return "body";
    case Modality::Voice: return "voice";
  }
  return "?";
}

std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "face") return Modality::Face;
  if (s == "body") return Modality::Body;
  if (s == "voice") return Modality::Voice;
  return std::nullopt;
}

std::string_view to_string(ClustererKind k) {
  switch (k) {
    case ClustererKind::KMeans: return "kmeans";
    case ClustererKind::DBSCAN: return "dbscan";
    case ClustererKind::HAC: return "hac";
    case ClustererKind::GraphCC: return "graph_cc";
  }
  return "?";
}

std::optional<ClustererKind> parse_clusterer(std::string_view s) {
  if (s == "kmeans") return ClustererKind::KMeans;
  if (s == "dbscan") return ClustererKind::DBSCAN;
  if (s == "hac") return ClustererKind::HAC;
  if (s == "graph_cc") return ClustererKind::GraphCC;
  return std::nullopt;
}

bool BBox::valid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         x1 < x2 && y1 < y2;
}

bool TimeInterval::valid() const {
  return std::isfinite(start) && std::isfinite(end) && start >= 0 && start <= end;
}

ValidationReport validate_dataset(std::span<const ObservationRecord> records) {
  ValidationReport report;
  auto add = [&](const ObservationRecord& r, const std::string& what) {
    report.violations.push_back("record " + std::to_string(r.id) + ": " + what);
  };

  std::optional<std::size_t> dims[kModalityCount];
  std::set<ObservationId> seen;
  std::set<ObservationId> reported_dupes;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second && reported_dupes.insert(r.id).second)
      report.violations.push_back("duplicate id " + std::to_string(r.id));

    auto& dim = dims[index_of(r.modality)];
    if (r.embedding.empty()) {
      add(r, "empty embedding");
    } else {
      if (!dim) dim = r.embedding.size();
      else if (*dim != r.embedding.size())
        add(r, "embedding dimension " + std::to_string(r.embedding.size()) + " differs from " +
                   std::string(to_string(r.modality)) + " dimension " + std::to_string(*dim));
      double sq = 0;
      bool finite = true;
      for (double v : r.embedding) {
        finite = finite && std::isfinite(v);
        sq += v * v;
      }
      if (!finite) add(r, "non-finite embedding value");
      else if (sq == 0) add(r, "zero embedding");
    }

    if (is_visual(r.modality)) {
      if (!r.bbox) add(r, "visual record missing bbox");
      else if (!r.bbox->valid()) add(r, "invalid bbox");
      if (!r.frame_id) add(r, "visual record missing frame_id");
    } else {
      if (r.bbox) add(r, "voice record carries bbox");
      if (r.frame_id) add(r, "voice record carries frame_id");
    }
    if (!r.interval.valid()) add(r, "invalid time interval");
    if (r.confidence && !(*r.confidence >= 0 && *r.confidence <= 1)) add(r, "confidence outside [0,1]");
  }
  return report;
}

std::vector<const ObservationRecord*> select(std::span<const ObservationRecord> records, Modality m) {
  std::vector<const ObservationRecord*> out;
  for (const auto& r : records)
    if (r.modality == m) out.push_back(&r);
  return out;
}

bool has_ground_truth(std::span<const ObservationRecord> records) {
  return std::any_of(records.begin(), records.end(), [](const auto& r) { return r.gt_label.has_value(); });
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  FeatureMatrix m(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw std::invalid_argument("ragged feature rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

FeatureMatrix FeatureMatrix::from_records(std::span<const ObservationRecord* const> records) {
  const std::size_t d = records.empty() ? 0 : records.front()->embedding.size();
  FeatureMatrix m(records.size(), d);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& e = records[i]->embedding;
    if (e.size() != d) throw std::invalid_argument("embedding dimension mismatch");
    std::copy(e.begin(), e.end(), m.row(i).begin());
  }
  return m;
}

LabelSpace LabelSpace::build(std::span<const ObservationRecord> records) {
  LabelSpace space;
  for (const auto& r : records)
    if (r.gt_label) space.labels_[index_of(r.modality)].emplace(*r.gt_label, 0);
  for (auto& per_modality : space.labels_) {
    std::int64_t next = 1;
    for (auto& [label, id] : per_modality) id = next++;
  }
  return space;
}

std::size_t LabelSpace::total() const {
  return labels_[0].size() + labels_[1].size() + labels_[2].size();
}

std::int64_t LabelSpace::offset(Modality m) const {
  std::int64_t off = 1;
  for (Modality before : kAllModalities) {
    if (before == m) break;
    off += static_cast<std::int64_t>(count(before));
  }
  return off;
}

std::optional<std::int64_t> LabelSpace::global_id(Modality m, const std::string& label) const {
  const auto& per_modality = labels_[index_of(m)];
  auto it = per_modality.find(label);
  if (it == per_modality.end()) return std::nullopt;
  return offset(m) + it->second - 1;
}

ClusterAssignment ClusterAssignment::from_labels(std::vector<ObservationId> ids,
                                                 std::span<const std::int64_t> labels) {
  if (ids.size() != labels.size()) throw std::invalid_argument("ids/labels size mismatch");
  ClusterAssignment a;
  a.ids_ = std::move(ids);
  a.labels_.resize(labels.size());
  std::unordered_map<std::int64_t, std::int32_t> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      a.labels_[i] = kNoise;
      continue;
    }
    auto [it, inserted] = remap.emplace(labels[i], static_cast<std::int32_t>(remap.size()));
    a.labels_[i] = it->second;
  }
  a.num_clusters_ = remap.size();
  a.rebuild_index();
  return a;
}

ClusterAssignment ClusterAssignment::from_dense(std::vector<ObservationId> ids,
                                                std::vector<std::int32_t> labels) {
  if (ids.size() != labels.size()) throw std::invalid_argument("ids/labels size mismatch");
  ClusterAssignment a;
  a.ids_ = std::move(ids);
  a.labels_ = std::move(labels);
  std::int32_t max_label = -1;
  for (auto l : a.labels_) {
    if (l < kNoise) throw std::invalid_argument("negative cluster id");
    max_label = std::max(max_label, l);
  }
  std::vector<bool> used(static_cast<std::size_t>(max_label + 1), false);
  for (auto l : a.labels_)
    if (l >= 0) used[static_cast<std::size_t>(l)] = true;
  if (std::find(used.begin(), used.end(), false) != used.end())
    throw std::invalid_argument("cluster ids are not dense");
  a.num_clusters_ = used.size();
  a.rebuild_index();
  return a;
}

void ClusterAssignment::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (!index_.emplace(ids_[i], i).second)
      throw std::invalid_argument("observation id " + std::to_string(ids_[i]) + " assigned twice");
}

std::size_t ClusterAssignment::num_noise() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), kNoise));
}

std::optional<std::int32_t> ClusterAssignment::cluster_of(ObservationId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return labels_[it->second];
}

ClusterAssignment ClusterAssignment::with_noise_as_singletons() const {
  ClusterAssignment a = *this;
  auto next = static_cast<std::int32_t>(num_clusters_);
  for (auto& l : a.labels_)
    if (l == kNoise) l = next++;
  a.num_clusters_ = static_cast<std::size_t>(next);
  return a;
}

std::vector<std::vector<ObservationId>> ClusterAssignment::members() const {
  std::vector<std::vector<ObservationId>> out(num_clusters_);
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (labels_[i] >= 0) out[static_cast<std::size_t>(labels_[i])].push_back(ids_[i]);
  return out;
}

void PipelineConfig::validate() const {
  auto unit = [](double v) { return std::isfinite(v) && v >= 0 && v <= 1; };
  for (Modality m : kAllModalities) {
    const auto& p = of(m);
    const std::string where = std::string(to_string(m)) + ": ";
    if (p.k < 1) throw ConfigError(where + "k must be positive");
    if (p.rank_threshold < 1) throw ConfigError(where + "rank_threshold must be positive");
    if (p.rank_threshold > p.k) throw ConfigError(where + "rank_threshold must not exceed k");
    if (p.kmeans.max_iter < 1 || p.kmeans.n_init < 1 || !(p.kmeans.tol >= 0))
      throw ConfigError(where + "invalid kmeans parameters");
    if (!std::isfinite(p.dbscan.eps) || p.dbscan.eps < 0 || p.dbscan.min_pts < 1)
      throw ConfigError(where + "invalid dbscan parameters");
    if (p.hac.n_clusters.has_value() == p.hac.distance_threshold.has_value() &&
        p.clusterer == ClustererKind::HAC)
      throw ConfigError(where + "hac needs exactly one of n_clusters or distance_threshold");
    if (p.hac.n_clusters && *p.hac.n_clusters < 1) throw ConfigError(where + "hac n_clusters must be positive");
    if (p.hac.distance_threshold && !std::isfinite(*p.hac.distance_threshold))
      throw ConfigError(where + "hac distance_threshold must be finite");
    if (!std::isfinite(p.graph_cc.similarity_threshold))
      throw ConfigError(where + "graph_cc similarity_threshold must be finite");
    if (p.clusterer == ClustererKind::KMeans && p.kmeans.k_clusters < 1)
      throw ConfigError(where + "kmeans k_clusters must be set");
  }
  if (!unit(fusion.tau_spatial)) throw ConfigError("tau_spatial must lie in [0,1]");
  if (!std::isfinite(fusion.tau_temporal) || fusion.tau_temporal < 0)
    throw ConfigError("tau_temporal must be a non-negative number");
  if (!unit(fusion.voice_confidence_min)) throw ConfigError("voice_confidence_min must lie in [0,1]");
}

}  // namespace chargroup
