#include "chargroup/config.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace chargroup {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

const std::set<std::string> kModalityKeys = {
    "k", "rank_threshold", "cyclic_fixpoint", "refinement", "refine_passes", "clusterer",
    "similarity", "kmeans.k_clusters", "kmeans.max_iter", "kmeans.tol", "kmeans.n_init",
    "dbscan.eps", "dbscan.min_pts", "hac.linkage", "hac.n_clusters", "hac.distance_threshold",
    "graph_cc.similarity_threshold"};

const std::set<std::string> kGlobalKeys = {"seed", "tau_spatial", "tau_temporal",
                                           "voice_confidence_min", "temporal_iou_normalized"};

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile f;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!section.empty()) key = section + "." + key;
    if (!f.entries_.emplace(key, value).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + key);
  }
  return f;
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
  const std::string v = get(key).value_or("");
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long long KeyValueFile::get_int(const std::string& key) const {
  const std::string v = get(key).value_or("");
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool KeyValueFile::get_bool(const std::string& key) const {
  const std::string v = get(key).value_or("");
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

PipelineConfig default_pipeline_config() { return PipelineConfig{}; }

PipelineConfig parse_pipeline_config(const std::string& text) {
  const auto file = KeyValueFile::parse(text);

  for (const auto& [key, value] : file.entries()) {
    if (kGlobalKeys.count(key) || kModalityKeys.count(key)) continue;
    const auto dot = key.find('.');
    if (dot != std::string::npos && parse_modality(key.substr(0, dot)) &&
        kModalityKeys.count(key.substr(dot + 1)))
      continue;
    throw ConfigError("unknown config key '" + key + "'");
  }

  PipelineConfig cfg;
  if (file.get("seed")) cfg.seed = static_cast<std::uint64_t>(file.get_int("seed"));
  if (file.get("tau_spatial")) cfg.fusion.tau_spatial = file.get_double("tau_spatial");
  if (file.get("tau_temporal")) cfg.fusion.tau_temporal = file.get_double("tau_temporal");
  if (file.get("voice_confidence_min")) cfg.fusion.voice_confidence_min = file.get_double("voice_confidence_min");
  if (file.get("temporal_iou_normalized"))
    cfg.fusion.temporal_iou_normalized = file.get_bool("temporal_iou_normalized");

  auto non_negative = [](long long v, const std::string& key) {
    if (v < 0) throw ConfigError(key + " must be non-negative");
    return static_cast<std::size_t>(v);
  };

  for (Modality m : kAllModalities) {
    auto& p = cfg.of(m);
    const std::string scope = std::string(to_string(m)) + ".";
    // Modality-scoped key wins over the shared one.
    auto key_for = [&](const std::string& key) -> std::optional<std::string> {
      if (file.get(scope + key)) return scope + key;
      if (file.get(key)) return key;
      return std::nullopt;
    };

    bool rank_set = false;
    if (auto k = key_for("k")) p.k = non_negative(file.get_int(*k), *k);
    if (auto k = key_for("rank_threshold")) {
      p.rank_threshold = non_negative(file.get_int(*k), *k);
      rank_set = true;
    }
    if (!rank_set) p.rank_threshold = p.k;
    if (auto k = key_for("cyclic_fixpoint")) p.cyclic_fixpoint = file.get_bool(*k);
    if (auto k = key_for("refinement")) p.refinement_enabled = file.get_bool(*k);
    if (auto k = key_for("refine_passes")) p.refine_passes = non_negative(file.get_int(*k), *k);
    if (auto k = key_for("similarity"); k && *file.get(*k) != "cosine")
      throw ConfigError(*k + ": only cosine similarity is supported");
    if (auto k = key_for("clusterer")) {
      auto kind = parse_clusterer(*file.get(*k));
      if (!kind) throw ConfigError(*k + ": unknown clusterer '" + *file.get(*k) + "'");
      p.clusterer = *kind;
    }
    if (auto k = key_for("kmeans.k_clusters")) p.kmeans.k_clusters = non_negative(file.get_int(*k), *k);
    if (auto k = key_for("kmeans.max_iter")) p.kmeans.max_iter = non_negative(file.get_int(*k), *k);
    if (auto k = key_for("kmeans.tol")) p.kmeans.tol = file.get_double(*k);
    if (auto k = key_for("kmeans.n_init")) p.kmeans.n_init = non_negative(file.get_int(*k), *k);
    if (auto k = key_for("dbscan.eps")) p.dbscan.eps = file.get_double(*k);
    if (auto k = key_for("dbscan.min_pts")) p.dbscan.min_pts = non_negative(file.get_int(*k), *k);
    if (auto k = key_for("hac.linkage")) {
      const auto v = *file.get(*k);
      if (v == "ward") p.hac.linkage = HacLinkage::Ward;
      else if (v == "average") p.hac.linkage = HacLinkage::Average;
      else throw ConfigError(*k + ": unknown linkage '" + v + "'");
    }
    if (auto k = key_for("hac.n_clusters")) p.hac.n_clusters = non_negative(file.get_int(*k), *k);
    if (auto k = key_for("hac.distance_threshold")) p.hac.distance_threshold = file.get_double(*k);
    if (auto k = key_for("graph_cc.similarity_threshold"))
      p.graph_cc.similarity_threshold = file.get_double(*k);
    p.kmeans.seed = cfg.seed;
  }
  cfg.validate();
  return cfg;
}

}  // namespace chargroup
