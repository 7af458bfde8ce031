#include "chargroup/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chargroup {

using ojson = nlohmann::ordered_json;

namespace {

ObservationRecord parse_record(const std::string& line, const ReadOptions& opts) {
  const auto j = nlohmann::json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  ObservationRecord r;
  r.id = j.at("id").get<std::int64_t>();
  const auto modality = parse_modality(j.at("modality").get<std::string>());
  if (!modality) throw std::invalid_argument("unknown modality");
  r.modality = *modality;
  r.embedding = j.at("embedding").get<std::vector<double>>();
  r.shot_id = j.at("shot_id").get<std::int64_t>();
  if (j.contains("frame_id")) r.frame_id = j.at("frame_id").get<std::int64_t>();
  if (j.contains("bbox")) {
    const auto b = j.at("bbox").get<std::vector<double>>();
    if (b.size() != 4) throw std::invalid_argument("bbox needs 4 numbers");
    r.bbox = BBox{b[0], b[1], b[2], b[3]};
  }
  r.interval.start = j.at("t_start").get<double>();
  r.interval.end = j.at("t_end").get<double>();
  if (opts.fps) {
    r.interval.start /= *opts.fps;
    r.interval.end /= *opts.fps;
  }
  if (j.contains("gt_label")) r.gt_label = j.at("gt_label").get<std::string>();
  if (j.contains("confidence")) r.confidence = j.at("confidence").get<double>();
  return r;
}

}  // namespace

Dataset read_dataset(std::istream& in, const ReadOptions& opts) {
  if (opts.fps && !(*opts.fps > 0)) throw ConfigError("fps must be positive");
  Dataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_record(line, opts));
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

Dataset read_dataset(const std::filesystem::path& path, const ReadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return read_dataset(in, opts);
}

std::string record_to_json_line(const ObservationRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["modality"] = to_string(r.modality);
  j["embedding"] = r.embedding;
  j["shot_id"] = r.shot_id;
  if (r.frame_id) j["frame_id"] = *r.frame_id;
  if (r.bbox) j["bbox"] = {r.bbox->x1, r.bbox->y1, r.bbox->x2, r.bbox->y2};
  j["t_start"] = r.interval.start;
  j["t_end"] = r.interval.end;
  if (r.gt_label) j["gt_label"] = *r.gt_label;
  if (r.confidence) j["confidence"] = *r.confidence;
  return j.dump();
}

void write_dataset(std::ostream& out, std::span<const ObservationRecord> records) {
  for (const auto& r : records) out << record_to_json_line(r) << '\n';
}

void write_dataset(const std::filesystem::path& path, std::span<const ObservationRecord> records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_dataset(out, records);
}

std::string assignment_to_json(const ClusterAssignment& a, std::optional<Modality> modality) {
  ojson j;
  if (modality) j["modality"] = to_string(*modality);
  j["n_clusters"] = a.num_clusters();
  auto rows = ojson::array();
  for (std::size_t i = 0; i < a.size(); ++i) rows.push_back({{"id", a.ids()[i]}, {"cluster", a.labels()[i]}});
  j["assignments"] = std::move(rows);
  return j.dump(1) + "\n";
}

ClusterAssignment assignment_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<ObservationId> ids;
    std::vector<std::int32_t> labels;
    for (const auto& row : j.at("assignments")) {
      ids.push_back(row.at("id").get<ObservationId>());
      labels.push_back(row.at("cluster").get<std::int32_t>());
    }
    return ClusterAssignment::from_dense(std::move(ids), std::move(labels));
  } catch (const std::exception& e) {
    throw DataError(std::string("bad assignment file: ") + e.what());
  }
}

std::string timelines_to_json(std::span<const CharacterTimeline> timelines) {
  auto arr = ojson::array();
  for (const auto& t : timelines) {
    auto entries = ojson::array();
    for (const auto& e : t.entries) {
      auto sources = ojson::array();
      for (auto m : e.sources) sources.push_back(to_string(m));
      entries.push_back({{"shot_id", e.shot_id},
                         {"t_start", e.interval.start},
                         {"t_end", e.interval.end},
                         {"source_modalities", std::move(sources)},
                         {"observation_ids", e.observation_ids}});
    }
    arr.push_back({{"character_id", t.character_id}, {"entries", std::move(entries)}});
  }
  return arr.dump(1) + "\n";
}

std::vector<CharacterTimeline> timelines_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<CharacterTimeline> out;
    for (const auto& t : j) {
      CharacterTimeline tl;
      tl.character_id = t.at("character_id").get<std::int32_t>();
      for (const auto& e : t.at("entries")) {
        TimelineEntry entry;
        entry.shot_id = e.at("shot_id").get<std::int64_t>();
        entry.interval = {e.at("t_start").get<double>(), e.at("t_end").get<double>()};
        for (const auto& s : e.at("source_modalities")) {
          auto m = parse_modality(s.get<std::string>());
          if (!m) throw std::invalid_argument("unknown modality in timeline");
          entry.sources.push_back(*m);
        }
        if (e.contains("observation_ids"))
          entry.observation_ids = e.at("observation_ids").get<std::vector<ObservationId>>();
        tl.entries.push_back(std::move(entry));
      }
      out.push_back(std::move(tl));
    }
    return out;
  } catch (const std::exception& e) {
    throw DataError(std::string("bad timeline file: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

}  // namespace chargroup
