#pragma once

#include <span>
#include <vector>

#include "chargroup/core_model.hpp"

namespace chargroup {

// Product over both axes of intersection-over-hull, each axis term clamped at
// zero before multiplying. An axis whose hull has zero width contributes 0.
double spatial_iou(const BBox& face, const BBox& body);

enum class SequenceKind { Visual, Voice };

// Time footprint of one cluster: sorted, coalesced intervals.
struct TrackSequence {
  std::int32_t cluster_id = 0;
  SequenceKind kind = SequenceKind::Visual;
  std::vector<TimeInterval> intervals;
  double mean_confidence = 1.0;
};

// Sorts and merges overlapping or touching intervals.
std::vector<TimeInterval> coalesce(std::vector<TimeInterval> intervals);

// Sum over interval pairs of max(0, overlap) / hull. A pair whose hull has
// zero length contributes 1 when the intervals coincide. With `normalized`
// the sum is divided by the number of pairs. Throws std::invalid_argument on
// an empty sequence.
double temporal_iou(const TrackSequence& a, const TrackSequence& b, bool normalized = false);

// One TrackSequence per cluster of `assignment` (noise ignored), built from
// the intervals of the member records.
std::vector<TrackSequence> build_sequences(const ClusterAssignment& assignment,
                                           std::span<const ObservationRecord> records, SequenceKind kind);

struct FaceBodyMatch {
  ObservationId face = 0;
  ObservationId body = 0;
  double iou = 0;
};

// Greedy per-frame matching by descending IOU (ties by face id, then body id);
// every face and body is used at most once and pairs under tau are dropped.
std::vector<FaceBodyMatch> match_faces_to_bodies(std::span<const ObservationRecord> records, double tau_spatial);

// Faces keep their face cluster id. Every body cluster takes the face label
// that most of its matched faces carry (ties to the smaller label); body
// clusters without matched faces get fresh labels after the face labels.
// Noise in either input is treated as singleton clusters.
ClusterAssignment associate_face_body(const ClusterAssignment& face_clusters, const ClusterAssignment& body_clusters,
                                      std::span<const ObservationRecord> records, double tau_spatial);

// Voice clusters whose mean confidence is below voice_confidence_min are
// dropped. Visual clusters reaching tau_temporal against the same surviving
// voice sequence are merged (transitively). Merged groups take the smallest
// member label; labels are then made dense preserving order.
ClusterAssignment merge_by_voice(const ClusterAssignment& visual, const ClusterAssignment& voice_clusters,
                                 std::span<const ObservationRecord> records, const FusionParams& params);

// Visual observations of each cluster grouped per shot and coalesced. Voice
// records never produce entries. Entries of one character that still overlap
// across shots are merged into the earlier entry.
std::vector<CharacterTimeline> build_timelines(const ClusterAssignment& fused,
                                               std::span<const ObservationRecord> records);

struct FusionResult {
  ClusterAssignment spatial;  // after face/body association
  ClusterAssignment fused;    // after voice bridging
  std::vector<CharacterTimeline> timelines;
};

// Spatial association followed by voice bridging and timeline assembly.
FusionResult fuse(const ClusterAssignment& face_clusters, const ClusterAssignment& body_clusters,
                  const ClusterAssignment& voice_clusters, std::span<const ObservationRecord> records,
                  const FusionParams& params);

}  // namespace chargroup
