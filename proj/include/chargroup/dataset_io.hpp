#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "chargroup/core_model.hpp"

namespace chargroup {

struct ReadOptions {
  // When set, t_start/t_end hold frame indices and are divided by fps.
  std::optional<double> fps;
};

// One ObservationRecord per line. Blank lines are skipped. Throws DataError
// naming the 1-based line number of the first malformed line.
Dataset read_dataset(std::istream& in, const ReadOptions& opts = {});
Dataset read_dataset(const std::filesystem::path& path, const ReadOptions& opts = {});

std::string record_to_json_line(const ObservationRecord& r);
void write_dataset(std::ostream& out, std::span<const ObservationRecord> records);
void write_dataset(const std::filesystem::path& path, std::span<const ObservationRecord> records);

// {"modality": ..., "n_clusters": C, "assignments": [{"id": .., "cluster": ..}, ...]}
std::string assignment_to_json(const ClusterAssignment& a, std::optional<Modality> modality);
ClusterAssignment assignment_from_json(const std::string& text);

// [{"character_id": .., "entries": [{"shot_id", "t_start", "t_end", "source_modalities", "observation_ids"}]}]
std::string timelines_to_json(std::span<const CharacterTimeline> timelines);
std::vector<CharacterTimeline> timelines_from_json(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace chargroup
