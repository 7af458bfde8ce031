#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "chargroup/config.hpp"
#include "chargroup/dataset_io.hpp"
#include "chargroup/synth.hpp"

using namespace chargroup;

namespace {

ObservationRecord good_face() {
  ObservationRecord r;
  r.id = 1;
  r.modality = Modality::Face;
  r.embedding = {0.6, 0.8};
  r.shot_id = 0;
  r.frame_id = 0;
  r.bbox = BBox{0, 0, 1, 1};
  r.interval = {0, 1};
  return r;
}

bool mentions(const ValidationReport& v, const std::string& text) {
  for (const auto& m : v.violations)
    if (m.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("dataset validation") {
  CHECK(validate_dataset(Dataset{good_face()}).ok());
  auto v = good_face();
  v.modality = Modality::Voice;
  CHECK(mentions(validate_dataset(Dataset{v}), "voice record carries bbox"));
  auto a = good_face(), b = good_face();
  a.id = b.id = 7;
  CHECK(mentions(validate_dataset(Dataset{a, b}), "duplicate id 7"));
  auto z = good_face();
  z.embedding = {0, 0};
  CHECK_FALSE(validate_dataset(Dataset{z}).ok());
  auto nobox = good_face();
  nobox.bbox.reset();
  CHECK_FALSE(validate_dataset(Dataset{nobox}).ok());
}

TEST_CASE("cluster assignment relabeling") {
  const std::vector<std::int64_t> raw{7, 7, -3, 2, 7};
  const auto a = ClusterAssignment::from_labels({10, 11, 12, 13, 14}, raw);
  CHECK(a.labels() == std::vector<std::int32_t>{0, 0, kNoise, 1, 0});
  CHECK(a.num_clusters() == 2);
  CHECK(a.num_noise() == 1);
  CHECK(a.cluster_of(13) == 1);
  CHECK_FALSE(a.cluster_of(99).has_value());
  const auto s = a.with_noise_as_singletons();
  CHECK(s.num_noise() == 0);
  CHECK(s.num_clusters() == 3);
}

TEST_CASE("label space ranges are disjoint") {
  auto f = good_face();
  f.gt_label = "x";
  auto b = good_face();
  b.id = 2;
  b.modality = Modality::Body;
  b.gt_label = "x";
  const auto ls = LabelSpace::build(Dataset{f, b});
  CHECK(ls.global_id(Modality::Face, "x") != ls.global_id(Modality::Body, "x"));
}

TEST_CASE("jsonl round trip is byte identical") {
  SynthSpec spec;
  spec.n_shots = 15;
  spec.seed = 4;
  const auto ds = generate(spec);
  std::ostringstream first;
  write_dataset(first, ds);
  std::istringstream in(first.str());
  const auto back = read_dataset(in);
  std::ostringstream second;
  write_dataset(second, back);
  CHECK(first.str() == second.str());
  CHECK(back.size() == ds.size());
}

TEST_CASE("malformed line names its number") {
  std::ostringstream out;
  Dataset ds;
  for (int i = 0; i < 20; ++i) {
    auto r = good_face();
    r.id = i;
    ds.push_back(r);
  }
  write_dataset(out, ds);
  std::string text = out.str();
  // corrupt line 17
  std::size_t pos = 0;
  for (int line = 1; line < 17; ++line) pos = text.find('\n', pos) + 1;
  text.insert(pos, "{not json");
  std::istringstream in(text);
  try {
    read_dataset(in);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 17") != std::string::npos);
  }
}

TEST_CASE("frame based times with fps") {
  std::istringstream in(
      R"({"id":0,"modality":"voice","embedding":[1,0],"shot_id":0,"t_start":50,"t_end":100})"
      "\n");
  ReadOptions opts;
  opts.fps = 25;
  const auto ds = read_dataset(in, opts);
  CHECK(ds[0].interval.start == doctest::Approx(2.0));
  CHECK(ds[0].interval.end == doctest::Approx(4.0));
}

TEST_CASE("assignment and timeline json round trips") {
  const auto a = ClusterAssignment::from_dense({4, 5, 6}, {0, 1, kNoise});
  CHECK(assignment_from_json(assignment_to_json(a, Modality::Body)) == a);
  std::vector<CharacterTimeline> tl(1);
  tl[0].character_id = 3;
  tl[0].entries.push_back({2, {1.5, 2.5}, {Modality::Face, Modality::Body}, {8, 9}});
  const auto back = timelines_from_json(timelines_to_json(tl));
  REQUIRE(back.size() == 1);
  CHECK(back[0].entries[0].observation_ids == std::vector<ObservationId>{8, 9});
  CHECK(timelines_to_json(back) == timelines_to_json(tl));
}

TEST_CASE("pipeline config parsing") {
  const auto cfg = parse_pipeline_config(R"(
# shared
k = 30
clusterer = kmeans
kmeans.k_clusters = 8
seed = 9
face.k = 12
[voice]
clusterer = dbscan
dbscan.eps = 0.2
)");
  CHECK(cfg.of(Modality::Face).k == 12);
  CHECK(cfg.of(Modality::Face).rank_threshold == 12);
  CHECK(cfg.of(Modality::Body).k == 30);
  CHECK(cfg.of(Modality::Body).kmeans.k_clusters == 8);
  CHECK(cfg.of(Modality::Body).kmeans.seed == 9);
  CHECK(cfg.of(Modality::Voice).clusterer == ClustererKind::DBSCAN);
  CHECK(cfg.of(Modality::Voice).dbscan.eps == doctest::Approx(0.2));
  CHECK(cfg.fusion.tau_spatial == 0.5);

  CHECK_THROWS_AS(parse_pipeline_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_pipeline_config("k = 5\nrank_threshold = 6\nclusterer = dbscan\n"), ConfigError);
  CHECK_THROWS_AS(parse_pipeline_config("clusterer = kmeans\n"), ConfigError);
  CHECK_THROWS_AS(parse_pipeline_config("k = 5\nk = 6\n"), ConfigError);
  CHECK_THROWS_AS(parse_pipeline_config("clusterer = dbscan\ntau_spatial = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_pipeline_config("clusterer = dbscan\nsimilarity = l2\n"), ConfigError);
}

TEST_CASE("synthetic generator") {
  SynthSpec spec;
  spec.seed = 12;
  const auto a = generate(spec), b = generate(spec);
  CHECK(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(record_to_json_line(a[i]) == record_to_json_line(b[i]));
  CHECK(validate_dataset(a).ok());
  CHECK(has_ground_truth(a));

  SUBCASE("zero sigma gives identical embeddings per sub-center") {
    spec.face_sigma = 0;
    spec.clothes_change_events = 0;
    const auto ds = generate(spec);
    std::map<std::string, std::vector<double>> first;
    for (const auto& r : ds) {
      if (r.modality != Modality::Face) continue;
      auto [it, inserted] = first.emplace(*r.gt_label, r.embedding);
      if (!inserted) CHECK(it->second == r.embedding);
    }
  }
  SUBCASE("no faceless appearances") {
    spec.faceless_fraction = 0;
    const auto ds = generate(spec);
    std::set<std::pair<std::int64_t, std::string>> faces, bodies;
    for (const auto& r : ds) {
      if (r.modality == Modality::Face) faces.insert({r.shot_id, *r.gt_label});
      if (r.modality == Modality::Body) bodies.insert({r.shot_id, *r.gt_label});
    }
    CHECK(faces == bodies);
  }
  SUBCASE("infeasible spec") {
    spec.n_identities = 0;
    CHECK_THROWS_AS(generate(spec), ConfigError);
  }
  CHECK_THROWS_AS(parse_synth_spec("n_shots = 3\nmystery = 1\n"), ConfigError);
  CHECK(parse_synth_spec("n_shots = 3\nseed = 5\n").n_shots == 3);
}
