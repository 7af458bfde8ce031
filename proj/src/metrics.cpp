#include "chargroup/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace chargroup {

namespace {

// Dense relabeling; negative predicted labels become fresh singletons.
std::vector<std::size_t> densify(std::span<const std::int64_t> labels, std::size_t& count) {
  std::unordered_map<std::int64_t, std::size_t> remap;
  std::vector<std::size_t> out(labels.size());
  count = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      out[i] = count++;
      continue;
    }
    auto [it, inserted] = remap.emplace(labels[i], count);
    if (inserted) ++count;
    out[i] = it->second;
  }
  return out;
}

struct Contingency {
  std::vector<std::size_t> pred, truth;
  std::size_t n_pred = 0, n_truth = 0;
  std::vector<double> pred_sizes, truth_sizes;
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  bool identical = false;
};

Contingency contingency(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("prediction covers " + std::to_string(pred.size()) + " items, truth " +
                                std::to_string(truth.size()));
  if (pred.empty()) throw std::invalid_argument("no items to evaluate");
  Contingency c;
  c.pred = densify(pred, c.n_pred);
  c.truth = densify(truth, c.n_truth);
  c.pred_sizes.assign(c.n_pred, 0);
  c.truth_sizes.assign(c.n_truth, 0);
  for (std::size_t i = 0; i < c.pred.size(); ++i) {
    c.pred_sizes[c.pred[i]] += 1;
    c.truth_sizes[c.truth[i]] += 1;
    c.joint[{c.pred[i], c.truth[i]}] += 1;
  }
  // Same partition iff every joint cell is a full row and a full column.
  c.identical = c.n_pred == c.n_truth && c.joint.size() == c.n_pred;
  return c;
}

double harmonic(double p, double r) { return (p + r) > 0 ? 2 * p * r / (p + r) : 0; }

double pairs(double n) { return n * (n - 1) / 2; }

}  // namespace

PrecisionRecall pairwise_f(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth) {
  const auto c = contingency(pred, truth);
  if (c.identical) return {1, 1, 1};
  double tp = 0, pred_pairs = 0, truth_pairs = 0;
  for (const auto& [cell, n] : c.joint) tp += pairs(n);
  for (double n : c.pred_sizes) pred_pairs += pairs(n);
  for (double n : c.truth_sizes) truth_pairs += pairs(n);
  PrecisionRecall pr;
  pr.precision = pred_pairs > 0 ? tp / pred_pairs : 0;
  pr.recall = truth_pairs > 0 ? tp / truth_pairs : 0;
  pr.f = harmonic(pr.precision, pr.recall);
  return pr;
}

PrecisionRecall bcubed_f(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth) {
  const auto c = contingency(pred, truth);
  if (c.identical) return {1, 1, 1};
  // Each item in cell (p,t) has precision n_pt/|p| and recall n_pt/|t|.
  double p_sum = 0, r_sum = 0;
  for (const auto& [cell, n] : c.joint) {
    p_sum += n * n / c.pred_sizes[cell.first];
    r_sum += n * n / c.truth_sizes[cell.second];
  }
  const auto items = static_cast<double>(pred.size());
  PrecisionRecall pr;
  pr.precision = p_sum / items;
  pr.recall = r_sum / items;
  pr.f = harmonic(pr.precision, pr.recall);
  return pr;
}

double nmi(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth) {
  const auto c = contingency(pred, truth);
  if (c.identical) return 1;
  const auto n = static_cast<double>(pred.size());
  auto entropy = [n](const std::vector<double>& sizes) {
    double h = 0;
    for (double s : sizes)
      if (s > 0) h -= (s / n) * std::log(s / n);
    return h;
  };
  const double hu = entropy(c.pred_sizes), hv = entropy(c.truth_sizes);
  if (hu <= 0 || hv <= 0) return 0;
  double mi = 0;
  for (const auto& [cell, nij] : c.joint)
    mi += (nij / n) * std::log(n * nij / (c.pred_sizes[cell.first] * c.truth_sizes[cell.second]));
  return std::clamp(mi / std::sqrt(hu * hv), 0.0, 1.0);
}

EvalReport evaluate(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth, EvalLevel level) {
  EvalReport r;
  r.level = level;
  r.pairwise = pairwise_f(pred, truth);
  r.bcubed = bcubed_f(pred, truth);
  r.nmi = nmi(pred, truth);
  r.n_items = pred.size();
  const auto c = contingency(pred, truth);
  r.n_pred_clusters = c.n_pred;
  r.n_true_clusters = c.n_truth;
  return r;
}

EvalReport evaluate_observations(const ClusterAssignment& pred_in, std::span<const ObservationRecord> records) {
  const ClusterAssignment pred = pred_in.with_noise_as_singletons();
  std::unordered_map<ObservationId, const ObservationRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);
  std::map<std::string, std::int64_t> identity;
  std::vector<std::int64_t> p, t;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto it = by_id.find(pred.ids()[i]);
    if (it == by_id.end()) throw DataError("prediction references unknown observation " + std::to_string(pred.ids()[i]));
    if (!it->second->gt_label)
      throw MissingGroundTruth("observation " + std::to_string(pred.ids()[i]) + " has no gt_label");
    auto [slot, inserted] = identity.emplace(*it->second->gt_label, static_cast<std::int64_t>(identity.size()));
    p.push_back(pred.labels()[i]);
    t.push_back(slot->second);
  }
  return evaluate(p, t, EvalLevel::Observation);
}

EvalReport shot_level_eval(std::span<const CharacterTimeline> timelines, std::span<const ObservationRecord> records) {
  // observation -> claiming character
  std::unordered_map<ObservationId, std::int32_t> claimed_by;
  for (const auto& tl : timelines)
    for (const auto& e : tl.entries)
      for (auto id : e.observation_ids) claimed_by.emplace(id, tl.character_id);

  // (shot, identity) -> character -> observation count
  std::map<std::pair<std::int64_t, std::string>, std::map<std::int32_t, std::size_t>> items;
  for (const auto& r : records) {
    if (!is_visual(r.modality) || !r.gt_label) continue;
    auto& votes = items[{r.shot_id, *r.gt_label}];
    if (auto it = claimed_by.find(r.id); it != claimed_by.end()) ++votes[it->second];
  }
  if (items.empty()) throw MissingGroundTruth("no visual observation carries gt_label");

  std::map<std::string, std::int64_t> identity;
  std::vector<std::int64_t> pred, truth;
  for (const auto& [key, votes] : items) {
    auto [slot, inserted] = identity.emplace(key.second, static_cast<std::int64_t>(identity.size()));
    truth.push_back(slot->second);
    std::int64_t label = -1;
    std::size_t best = 0;
    for (const auto& [character, count] : votes)
      if (count > best) {
        best = count;
        label = character;
      }
    pred.push_back(label);  // -1 -> singleton
  }
  return evaluate(pred, truth, EvalLevel::Shot);
}

namespace {

const char* level_name(EvalLevel l) { return l == EvalLevel::Shot ? "shot" : "observation"; }

}  // namespace

std::string report_to_json(std::span<const EvalReport> reports) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["level"] = level_name(r.level);
    j["f_pairwise"] = r.pairwise.f;
    j["pairwise_precision"] = r.pairwise.precision;
    j["pairwise_recall"] = r.pairwise.recall;
    j["f_bcubed"] = r.bcubed.f;
    j["bcubed_precision"] = r.bcubed.precision;
    j["bcubed_recall"] = r.bcubed.recall;
    j["nmi"] = r.nmi;
    j["n_items"] = r.n_items;
    j["n_pred_clusters"] = r.n_pred_clusters;
    j["n_true_clusters"] = r.n_true_clusters;
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::string report_to_table(std::span<const EvalReport> reports) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %8s %8s %8s %8s %8s %8s\n", "level", "F_P", "P_P", "R_P", "F_B",
                "P_B", "R_B", "NMI", "items", "clusters");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-12s %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8zu %8zu\n", level_name(r.level),
                  r.pairwise.f, r.pairwise.precision, r.pairwise.recall, r.bcubed.f, r.bcubed.precision,
                  r.bcubed.recall, r.nmi, r.n_items, r.n_pred_clusters);
    out += line;
  }
  return out;
}

}  // namespace chargroup
