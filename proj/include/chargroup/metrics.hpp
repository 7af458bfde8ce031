#pragma once

#include <span>
#include <string>
#include <vector>

#include "chargroup/core_model.hpp"

namespace chargroup {

struct PrecisionRecall {
  double precision = 0;
  double recall = 0;
  double f = 0;
};

// Label vectors index the same items; negative predicted labels count as
// singleton clusters. All throw std::invalid_argument on size mismatch or
// empty input.
//
// 0/0 precision or recall is 0, except when the two partitions are identical,
// where every score is 1.
PrecisionRecall pairwise_f(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth);
PrecisionRecall bcubed_f(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth);
// I(U;V) / sqrt(H(U) H(V)), natural log. Identical partitions score 1; a
// zero entropy on either side with differing partitions scores 0.
double nmi(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth);

enum class EvalLevel { Observation, Shot };

struct EvalReport {
  EvalLevel level = EvalLevel::Observation;
  PrecisionRecall pairwise;
  PrecisionRecall bcubed;
  double nmi = 0;
  std::size_t n_items = 0;
  std::size_t n_pred_clusters = 0;
  std::size_t n_true_clusters = 0;
};

EvalReport evaluate(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth, EvalLevel level);

// Aligns an assignment with the records' ground-truth identities. Items are
// the assignment's observations; throws MissingGroundTruth when one of them
// has no gt_label and DataError when an id is unknown.
EvalReport evaluate_observations(const ClusterAssignment& pred, std::span<const ObservationRecord> records);

// Items are the distinct (shot, identity) pairs over visual records with
// ground truth. An item's predicted label is the character whose timeline
// entries claim most of that identity's observations in that shot (ties to the
// smaller character id); unclaimed items are singletons. Throws
// MissingGroundTruth when no visual record carries gt_label.
EvalReport shot_level_eval(std::span<const CharacterTimeline> timelines, std::span<const ObservationRecord> records);

std::string report_to_json(std::span<const EvalReport> reports);
// Fixed-width table for terminals.
std::string report_to_table(std::span<const EvalReport> reports);

}  // namespace chargroup
