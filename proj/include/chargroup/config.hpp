#pragma once

#include <map>
#include <optional>
#include <string>

#include "chargroup/core_model.hpp"

namespace chargroup {

// Flat `key = value` file with `#` comments and optional `[section]` headers.
// A key below `[sec]` is stored as `sec.key`. Values may be quoted.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::optional<std::string> get(const std::string& key) const;

  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;

 private:
  std::map<std::string, std::string> entries_;
};

// Modality-scoped keys (`face.k`, `body.kmeans.k_clusters`) override the
// shared ones (`k`, `kmeans.k_clusters`). Unknown keys are rejected.
PipelineConfig parse_pipeline_config(const std::string& text);
PipelineConfig default_pipeline_config();

}  // namespace chargroup
