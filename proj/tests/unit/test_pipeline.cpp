#include <doctest.h>

#include "chargroup/association.hpp"
#include "chargroup/config.hpp"
#include "chargroup/dataset_io.hpp"
#include "chargroup/metrics.hpp"
#include "chargroup/parallel.hpp"
#include "chargroup/pipeline.hpp"
#include "chargroup/synth.hpp"

using namespace chargroup;

namespace {

PipelineConfig kmeans_config(std::size_t clusters) {
  PipelineConfig cfg;
  for (auto& m : cfg.modality) {
    m.k = 10;
    m.rank_threshold = 10;
    m.kmeans.k_clusters = clusters;
  }
  return cfg;
}

}  // namespace

TEST_CASE("pipeline runs every modality and is worker independent") {
  SynthSpec spec;
  spec.seed = 3;
  spec.n_shots = 60;
  const auto ds = generate(spec);
  const auto cfg = kmeans_config(10);
  set_worker_count(1);
  const auto a = run_all_modalities(ds, cfg);
  set_worker_count(4);
  const auto b = run_all_modalities(ds, cfg);
  set_worker_count(1);
  for (std::size_t m = 0; m < kModalityCount; ++m) {
    CHECK(a[m].assignment == b[m].assignment);
    CHECK(a[m].knn == b[m].knn);
    CHECK(a[m].features == b[m].features);
    CHECK(a[m].dynamic.num_edges() <= a[m].knn.num_edges());
  }
}

TEST_CASE("clean faces cluster well") {
  SynthSpec spec;
  spec.seed = 8;
  const auto ds = generate(spec);
  const auto run = run_modality(ds, Modality::Face, kmeans_config(10).of(Modality::Face));
  CHECK(evaluate_observations(run.assignment, ds).pairwise.f > 0.9);
}

TEST_CASE("perfect clusters give perfect starred metrics") {
  SynthSpec spec;
  spec.seed = 2;
  spec.n_shots = 40;
  const auto ds = generate(spec);
  std::vector<ObservationId> ids[kModalityCount];
  std::vector<std::int64_t> labels[kModalityCount];
  for (const auto& r : ds) {
    ids[index_of(r.modality)].push_back(r.id);
    labels[index_of(r.modality)].push_back(std::stoll(r.gt_label->substr(3)));
  }
  auto assignment = [&](Modality m) { return ClusterAssignment::from_labels(ids[index_of(m)], labels[index_of(m)]); };
  FusionParams p;
  p.tau_temporal = 1e9;
  const auto r = fuse(assignment(Modality::Face), assignment(Modality::Body), assignment(Modality::Voice), ds, p);
  const auto e = shot_level_eval(r.timelines, ds);
  CHECK(e.pairwise.f == doctest::Approx(1.0));
  CHECK(e.bcubed.f == doctest::Approx(1.0));
  CHECK(e.nmi == doctest::Approx(1.0));
}

TEST_CASE("empty modality gives an empty assignment") {
  SynthSpec spec;
  spec.seed = 1;
  spec.n_shots = 10;
  spec.voice_cooccurrence = 0;
  const auto ds = generate(spec);
  const auto run = run_modality(ds, Modality::Voice, kmeans_config(3).of(Modality::Voice));
  CHECK(run.assignment.size() == 0);
}
