#include "chargroup/association.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "chargroup/union_find.hpp"

namespace chargroup {

namespace {

double axis_term(double lo_a, double hi_a, double lo_b, double hi_b) {
  const double hull = std::max(hi_a, hi_b) - std::min(lo_a, lo_b);
  if (!(hull > 0)) return 0;
  return std::max(0.0, (std::min(hi_a, hi_b) - std::max(lo_a, lo_b)) / hull);
}

std::unordered_map<ObservationId, const ObservationRecord*> index_records(std::span<const ObservationRecord> records) {
  std::unordered_map<ObservationId, const ObservationRecord*> by_id;
  by_id.reserve(records.size());
  for (const auto& r : records) by_id.emplace(r.id, &r);
  return by_id;
}

}  // namespace

double spatial_iou(const BBox& face, const BBox& body) {
  return axis_term(face.x1, face.x2, body.x1, body.x2) * axis_term(face.y1, face.y2, body.y1, body.y2);
}

std::vector<TimeInterval> coalesce(std::vector<TimeInterval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const TimeInterval& a, const TimeInterval& b) { return a.start != b.start ? a.start < b.start : a.end < b.end; });
  std::vector<TimeInterval> out;
  for (const auto& iv : intervals) {
    if (!out.empty() && iv.start <= out.back().end) out.back().end = std::max(out.back().end, iv.end);
    else out.push_back(iv);
  }
  return out;
}

double temporal_iou(const TrackSequence& a, const TrackSequence& b, bool normalized) {
  if (a.intervals.empty() || b.intervals.empty()) throw std::invalid_argument("temporal_iou: empty sequence");
  double total = 0;
  for (const auto& p : a.intervals) {
    for (const auto& q : b.intervals) {
      const double hull = std::max(p.end, q.end) - std::min(p.start, q.start);
      if (!(hull > 0)) {
        total += (p == q) ? 1.0 : 0.0;
        continue;
      }
      total += std::max(0.0, std::min(p.end, q.end) - std::max(p.start, q.start)) / hull;
    }
  }
  if (normalized) total /= static_cast<double>(a.intervals.size() * b.intervals.size());
  return total;
}

std::vector<TrackSequence> build_sequences(const ClusterAssignment& assignment,
                                           std::span<const ObservationRecord> records, SequenceKind kind) {
  const auto by_id = index_records(records);
  std::vector<std::vector<TimeInterval>> intervals(assignment.num_clusters());
  std::vector<double> conf_sum(assignment.num_clusters(), 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto label = assignment.labels()[i];
    if (label < 0) continue;
    auto it = by_id.find(assignment.ids()[i]);
    if (it == by_id.end())
      throw DataError("assignment references unknown observation " + std::to_string(assignment.ids()[i]));
    intervals[static_cast<std::size_t>(label)].push_back(it->second->interval);
    conf_sum[static_cast<std::size_t>(label)] += it->second->confidence_or_default();
  }
  std::vector<TrackSequence> out;
  for (std::size_t c = 0; c < intervals.size(); ++c) {
    TrackSequence seq;
    seq.cluster_id = static_cast<std::int32_t>(c);
    seq.kind = kind;
    seq.mean_confidence = intervals[c].empty() ? 0 : conf_sum[c] / static_cast<double>(intervals[c].size());
    seq.intervals = coalesce(std::move(intervals[c]));
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<FaceBodyMatch> match_faces_to_bodies(std::span<const ObservationRecord> records, double tau_spatial) {
  struct Frame {
    std::vector<const ObservationRecord*> faces, bodies;
  };
  std::map<std::int64_t, Frame> by_frame;
  for (const auto& r : records) {
    if (!is_visual(r.modality) || !r.frame_id || !r.bbox) continue;
    auto& f = by_frame[*r.frame_id];
    (r.modality == Modality::Face ? f.faces : f.bodies).push_back(&r);
  }
  std::vector<const Frame*> frames;
  for (const auto& [id, f] : by_frame)
    if (!f.faces.empty() && !f.bodies.empty()) frames.push_back(&f);

  std::vector<std::vector<FaceBodyMatch>> per_frame(frames.size());
  const auto nf = static_cast<std::ptrdiff_t>(frames.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t s = 0; s < nf; ++s) {
    const Frame& f = *frames[static_cast<std::size_t>(s)];
    std::vector<FaceBodyMatch> candidates;
    for (const auto* face : f.faces)
      for (const auto* body : f.bodies) {
        const double iou = spatial_iou(*face->bbox, *body->bbox);
        if (iou >= tau_spatial) candidates.push_back({face->id, body->id, iou});
      }
    std::sort(candidates.begin(), candidates.end(), [](const FaceBodyMatch& a, const FaceBodyMatch& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      if (a.face != b.face) return a.face < b.face;
      return a.body < b.body;
    });
    std::set<ObservationId> used_faces, used_bodies;
    auto& out = per_frame[static_cast<std::size_t>(s)];
    for (const auto& c : candidates) {
      if (used_faces.count(c.face) || used_bodies.count(c.body)) continue;
      used_faces.insert(c.face);
      used_bodies.insert(c.body);
      out.push_back(c);
    }
  }
  std::vector<FaceBodyMatch> all;
  for (auto& v : per_frame) all.insert(all.end(), v.begin(), v.end());
  return all;
}

ClusterAssignment associate_face_body(const ClusterAssignment& face_clusters, const ClusterAssignment& body_clusters,
                                      std::span<const ObservationRecord> records, double tau_spatial) {
  const ClusterAssignment faces = face_clusters.with_noise_as_singletons();
  const ClusterAssignment bodies = body_clusters.with_noise_as_singletons();

  // votes[body cluster][face label] = matched face count
  std::vector<std::map<std::int32_t, std::size_t>> votes(bodies.num_clusters());
  for (const auto& m : match_faces_to_bodies(records, tau_spatial)) {
    const auto fl = faces.cluster_of(m.face);
    const auto bl = bodies.cluster_of(m.body);
    if (!fl || !bl) continue;
    ++votes[static_cast<std::size_t>(*bl)][*fl];
  }

  std::vector<std::int32_t> body_label(bodies.num_clusters());
  auto fresh = static_cast<std::int32_t>(faces.num_clusters());
  for (std::size_t b = 0; b < votes.size(); ++b) {
    if (votes[b].empty()) {
      body_label[b] = fresh++;
      continue;
    }
    // std::map iterates labels ascending, so strict > keeps the smaller label on ties.
    std::int32_t winner = votes[b].begin()->first;
    std::size_t best = 0;
    for (const auto& [label, count] : votes[b])
      if (count > best) {
        best = count;
        winner = label;
      }
    body_label[b] = winner;
  }

  std::vector<ObservationId> ids = faces.ids();
  std::vector<std::int32_t> labels = faces.labels();
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    ids.push_back(bodies.ids()[i]);
    labels.push_back(body_label[static_cast<std::size_t>(bodies.labels()[i])]);
  }
  return ClusterAssignment::from_dense(std::move(ids), std::move(labels));
}

ClusterAssignment merge_by_voice(const ClusterAssignment& visual_in, const ClusterAssignment& voice_clusters,
                                 std::span<const ObservationRecord> records, const FusionParams& params) {
  const ClusterAssignment visual = visual_in.with_noise_as_singletons();
  const auto visual_seqs = build_sequences(visual, records, SequenceKind::Visual);
  const auto voice_seqs = build_sequences(voice_clusters, records, SequenceKind::Voice);

  UnionFind uf(visual.num_clusters());
  for (const auto& v : voice_seqs) {
    if (v.intervals.empty() || v.mean_confidence < params.voice_confidence_min) continue;
    std::optional<std::size_t> first;
    for (const auto& s : visual_seqs) {
      if (s.intervals.empty()) continue;
      if (temporal_iou(s, v, params.temporal_iou_normalized) < params.tau_temporal) continue;
      const auto c = static_cast<std::size_t>(s.cluster_id);
      if (first) uf.unite(*first, c);
      else first = c;
    }
  }

  // Group label = smallest member cluster id; then densify in ascending order.
  const std::size_t n = visual.num_clusters();
  std::vector<std::size_t> group_min(n, n);
  for (std::size_t c = 0; c < n; ++c) group_min[uf.find(c)] = std::min(group_min[uf.find(c)], c);
  std::vector<std::int32_t> dense(n, -1);
  std::int32_t next = 0;
  for (std::size_t c = 0; c < n; ++c)
    if (group_min[uf.find(c)] == c) dense[c] = next++;
  std::vector<std::int32_t> labels;
  labels.reserve(visual.size());
  for (auto l : visual.labels()) labels.push_back(dense[group_min[uf.find(static_cast<std::size_t>(l))]]);
  return ClusterAssignment::from_dense(visual.ids(), std::move(labels));
}

std::vector<CharacterTimeline> build_timelines(const ClusterAssignment& fused_in,
                                               std::span<const ObservationRecord> records) {
  const ClusterAssignment fused = fused_in.with_noise_as_singletons();
  const auto by_id = index_records(records);

  // character -> shot -> member records
  std::map<std::int32_t, std::map<std::int64_t, std::vector<const ObservationRecord*>>> groups;
  for (std::size_t i = 0; i < fused.size(); ++i) {
    auto it = by_id.find(fused.ids()[i]);
    if (it == by_id.end())
      throw DataError("assignment references unknown observation " + std::to_string(fused.ids()[i]));
    const ObservationRecord* r = it->second;
    if (!is_visual(r->modality)) continue;
    groups[fused.labels()[i]][r->shot_id].push_back(r);
  }

  auto absorb = [](TimelineEntry& into, const TimelineEntry& from) {
    into.interval.end = std::max(into.interval.end, from.interval.end);
    into.sources.insert(into.sources.end(), from.sources.begin(), from.sources.end());
    into.observation_ids.insert(into.observation_ids.end(), from.observation_ids.begin(), from.observation_ids.end());
  };

  std::vector<CharacterTimeline> out;
  for (auto& [character, shots] : groups) {
    std::vector<TimelineEntry> entries;
    for (auto& [shot, members] : shots) {
      std::sort(members.begin(), members.end(), [](const ObservationRecord* a, const ObservationRecord* b) {
        if (a->interval.start != b->interval.start) return a->interval.start < b->interval.start;
        return a->id < b->id;
      });
      for (const auto* r : members) {
        TimelineEntry e{shot, r->interval, {r->modality}, {r->id}};
        if (!entries.empty() && entries.back().shot_id == shot && r->interval.start <= entries.back().interval.end)
          absorb(entries.back(), e);
        else
          entries.push_back(std::move(e));
      }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const TimelineEntry& a, const TimelineEntry& b) {
      return a.interval.start < b.interval.start;
    });
    std::vector<TimelineEntry> merged;
    for (auto& e : entries) {
      if (!merged.empty() && e.interval.start < merged.back().interval.end) absorb(merged.back(), e);
      else merged.push_back(std::move(e));
    }
    for (auto& e : merged) {
      std::sort(e.sources.begin(), e.sources.end());
      e.sources.erase(std::unique(e.sources.begin(), e.sources.end()), e.sources.end());
      std::sort(e.observation_ids.begin(), e.observation_ids.end());
    }
    out.push_back({character, std::move(merged)});
  }
  return out;
}

namespace {

void check_coverage(const ClusterAssignment& a, std::span<const ObservationRecord> records, Modality m) {
  std::size_t expected = 0;
  for (const auto& r : records) {
    if (r.modality != m) continue;
    ++expected;
    if (!a.contains(r.id))
      throw DataError(std::string(to_string(m)) + " assignment misses observation " + std::to_string(r.id));
  }
  if (a.size() != expected)
    throw DataError(std::string(to_string(m)) + " assignment covers " + std::to_string(a.size()) +
                    " observations, dataset has " + std::to_string(expected));
}

}  // namespace

FusionResult fuse(const ClusterAssignment& face_clusters, const ClusterAssignment& body_clusters,
                  const ClusterAssignment& voice_clusters, std::span<const ObservationRecord> records,
                  const FusionParams& params) {
  check_coverage(face_clusters, records, Modality::Face);
  check_coverage(body_clusters, records, Modality::Body);
  check_coverage(voice_clusters, records, Modality::Voice);
  FusionResult out;
  out.spatial = associate_face_body(face_clusters, body_clusters, records, params.tau_spatial);
  out.fused = merge_by_voice(out.spatial, voice_clusters, records, params);
  out.timelines = build_timelines(out.fused, records);
  return out;
}

}  // namespace chargroup
