#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chargroup/association.hpp"
#include "chargroup/bench.hpp"
#include "chargroup/config.hpp"
#include "chargroup/dataset_io.hpp"
#include "chargroup/metrics.hpp"
#include "chargroup/parallel.hpp"
#include "chargroup/pipeline.hpp"
#include "chargroup/synth.hpp"

namespace fs = std::filesystem;
using namespace chargroup;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kData = 2, kConfig = 3, kEvalPrecondition = 4 };

struct Globals {
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed_override;
  std::string log_level = "info";
};

PipelineConfig load_config(const std::string& path, const Globals& g) {
  PipelineConfig cfg = path.empty() ? default_pipeline_config() : parse_pipeline_config(read_text_file(path));
  if (g.seed_override) {
    cfg.seed = *g.seed_override;
    for (auto& m : cfg.modality) m.kmeans.seed = cfg.seed;
  }
  return cfg;
}

Dataset load_dataset(const std::string& path) {
  Dataset ds = read_dataset(fs::path(path));
  const auto problems = validate_dataset(ds).violations;
  if (!problems.empty()) {
    for (const auto& p : problems) spdlog::error("{}", p);
    throw DataError(path + ": " + std::to_string(problems.size()) + " invariant violation(s), first: " + problems[0]);
  }
  spdlog::info("read {} records from {}", ds.size(), path);
  return ds;
}

std::string assignment_file(Modality m) { return std::string(to_string(m)) + ".json"; }

int cmd_cluster(const std::string& dataset, const std::string& config, const std::string& out, const Globals& g) {
  const auto cfg = load_config(config, g);
  const auto ds = load_dataset(dataset);
  const auto runs = run_all_modalities(ds, cfg);
  fs::create_directories(out);
  for (const auto& run : runs) {
    spdlog::info("{}: {} observations, {} edges -> {} after cyclic matching, {} clusters", to_string(run.modality),
                 run.ids.size(), run.knn.num_edges(), run.dynamic.num_edges(), run.assignment.num_clusters());
    write_text_file(fs::path(out) / assignment_file(run.modality), assignment_to_json(run.assignment, run.modality));
  }
  return kOk;
}

ClusterAssignment read_assignment(const fs::path& dir, Modality m) {
  const auto path = dir / assignment_file(m);
  if (!fs::exists(path)) throw DataError("missing assignment file " + path.string());
  try {
    return assignment_from_json(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

int cmd_fuse(const std::string& assignments, const std::string& dataset, const std::string& config,
             const std::string& out, const Globals& g) {
  const auto cfg = load_config(config, g);
  const auto ds = load_dataset(dataset);
  const fs::path dir(assignments);
  const auto face = read_assignment(dir, Modality::Face);
  const auto body = read_assignment(dir, Modality::Body);
  const auto voice = read_assignment(dir, Modality::Voice);
  const auto result = fuse(face, body, voice, ds, cfg.fusion);
  spdlog::info("clusters: face {} body {} -> spatial {} -> fused {}; {} timelines", face.num_clusters(),
               body.num_clusters(), result.spatial.num_clusters(), result.fused.num_clusters(),
               result.timelines.size());
  fs::create_directories(out);
  write_text_file(fs::path(out) / "timelines.json", timelines_to_json(result.timelines));
  if (has_ground_truth(ds)) {
    std::vector<EvalReport> reports{evaluate_observations(result.fused, ds), shot_level_eval(result.timelines, ds)};
    write_text_file(fs::path(out) / "eval.json", report_to_json(reports));
    std::cout << report_to_table(reports);
  } else {
    spdlog::info("no ground truth; skipping evaluation");
  }
  return kOk;
}

// Prediction may be an assignment object or a timeline array.
int cmd_eval(const std::string& pred_path, const std::string& dataset, const std::string& out) {
  const auto ds = load_dataset(dataset);
  if (!has_ground_truth(ds)) throw MissingGroundTruth(dataset + " carries no gt_label");
  const auto text = read_text_file(pred_path);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(pred_path + ": " + e.what());
  }
  ClusterAssignment assignment;
  std::vector<CharacterTimeline> timelines;
  try {
    if (parsed.is_array()) {
      timelines = timelines_from_json(text);
      std::vector<ObservationId> ids;
      std::vector<std::int64_t> labels;
      for (const auto& tl : timelines)
        for (const auto& e : tl.entries)
          for (auto id : e.observation_ids) {
            ids.push_back(id);
            labels.push_back(tl.character_id);
          }
      assignment = ClusterAssignment::from_labels(std::move(ids), labels);
    } else {
      assignment = assignment_from_json(text);
      timelines = build_timelines(assignment, ds);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(pred_path + ": " + e.what());
  }
  std::vector<EvalReport> reports{evaluate_observations(assignment, ds), shot_level_eval(timelines, ds)};
  std::cout << report_to_table(reports);
  if (!out.empty()) write_text_file(out, report_to_json(reports));
  return kOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out, const Globals& g) {
  SynthSpec spec = parse_synth_spec(read_text_file(spec_path));
  if (g.seed_override) spec.seed = *g.seed_override;
  const auto ds = generate(spec);
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  write_dataset(fs::path(out), ds);
  spdlog::info("wrote {} records to {}", ds.size(), out);
  return kOk;
}

int cmd_bench(GraphBenchOptions opts, const std::string& out, const Globals& g) {
  if (opts.n_list.empty()) throw ConfigError("bench: --n needs at least one size");
  if (g.seed_override) opts.seed = *g.seed_override;
  const auto rows = bench_graph_build(opts);
  const auto csv = bench_to_csv(rows);
  if (out.empty())
    std::cout << csv;
  else
    write_text_file(out, csv);
  for (const auto& r : rows)
    spdlog::info("n={} knn {:.1f} ms, cyclic {:.2f} ms ({:.2f}%)", r.n, r.t_knn_ms, r.t_cyclic_ms,
                 100.0 * r.t_cyclic_ms / r.t_knn_ms);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character grouping over face, body and voice embeddings"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--workers", g.workers, "OpenMP worker count")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed-override", seed, "Replace the seed of config or synth spec");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

  std::string dataset, config, out, assignments, pred, spec;
  auto* cluster = app.add_subcommand("cluster", "Cluster every modality of a dataset");
  cluster->add_option("dataset", dataset, "Observation JSONL")->required();
  cluster->add_option("--config", config, "Pipeline config");
  cluster->add_option("--out", out, "Output directory")->required();

  auto* fuse_cmd = app.add_subcommand("fuse", "Associate per-modality clusters into character timelines");
  fuse_cmd->add_option("assignments", assignments, "Directory with face.json, body.json, voice.json")->required();
  fuse_cmd->add_option("dataset", dataset, "Observation JSONL")->required();
  fuse_cmd->add_option("--config", config, "Pipeline config");
  fuse_cmd->add_option("--out", out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Score an assignment or timeline file against ground truth");
  eval->add_option("pred", pred, "Assignment JSON or timelines JSON")->required();
  eval->add_option("dataset", dataset, "Observation JSONL with gt_label")->required();
  eval->add_option("--out", out, "Write the report as JSON");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("spec", spec, "Synth spec file")->required();
  synth->add_option("--out", out, "Output JSONL")->required();

  GraphBenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "Time k-NN construction against cyclic matching");
  bench->add_option("--n", bench_opts.n_list, "Graph sizes")->delimiter(',')->required();
  bench->add_option("--d", bench_opts.d, "Embedding dimension")->check(CLI::PositiveNumber);
  bench->add_option("--k", bench_opts.k, "Neighbors per node")->check(CLI::PositiveNumber);
  bench->add_option("--rank-threshold", bench_opts.rank_threshold, "Cyclic matching threshold (default k)");
  bench->add_option("--out", out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (*seed_opt) g.seed_override = seed;

  auto logger = spdlog::stderr_color_mt("chargroup");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::from_str(g.log_level));
  set_worker_count(g.workers);

  try {
    if (*cluster) return cmd_cluster(dataset, config, out, g);
    if (*fuse_cmd) return cmd_fuse(assignments, dataset, config, out, g);
    if (*eval) return cmd_eval(pred, dataset, out);
    if (*synth) return cmd_synth(spec, out, g);
    if (*bench) return cmd_bench(bench_opts, out, g);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfig;
  } catch (const MissingGroundTruth& e) {
    spdlog::error("evaluation needs ground truth: {}", e.what());
    return kEvalPrecondition;
  } catch (const DataError& e) {
    spdlog::error("data error: {}", e.what());
    return kData;
  } catch (const std::invalid_argument& e) {
    spdlog::error("data error: {}", e.what());
    return kData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kFailure;
}
