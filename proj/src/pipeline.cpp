#include "chargroup/pipeline.hpp"

#include "chargroup/clusterers.hpp"
#include "chargroup/feature_refine.hpp"

namespace chargroup {

ModalityRun run_modality(std::span<const ObservationRecord> records, Modality m, const ModalityPipeline& pipeline) {
  ModalityRun run;
  run.modality = m;
  const auto selected = select(records, m);
  for (const auto* r : selected) run.ids.push_back(r->id);
  if (selected.empty()) {
    run.assignment = ClusterAssignment::from_dense({}, {});
    return run;
  }
  run.features = FeatureMatrix::from_records(selected);
  run.knn = build_knn_graph(run.features, pipeline.k);
  run.dynamic = cyclic_match(run.knn, pipeline.rank_threshold, pipeline.cyclic_fixpoint);
  if (pipeline.refinement_enabled && pipeline.refine_passes > 0)
    run.features = refine_features({run.features, 0}, run.dynamic, pipeline.refine_passes).features;
  run.assignment = make_backend(pipeline)->cluster(run.features, run.dynamic, run.ids);
  return run;
}

std::array<ModalityRun, kModalityCount> run_all_modalities(std::span<const ObservationRecord> records,
                                                           const PipelineConfig& config) {
  std::array<ModalityRun, kModalityCount> out;
  for (Modality m : kAllModalities) out[index_of(m)] = run_modality(records, m, config.of(m));
  return out;
}

}  // namespace chargroup
