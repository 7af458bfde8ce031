#pragma once

#include <array>

#include "chargroup/affinity_graph.hpp"
#include "chargroup/core_model.hpp"

namespace chargroup {

struct ModalityRun {
  Modality modality = Modality::Face;
  std::vector<ObservationId> ids;  // dataset order
  AffinityGraph knn;               // fixed-k graph
  AffinityGraph dynamic;           // after cyclic matching
  FeatureMatrix features;          // refined when refinement is enabled
  ClusterAssignment assignment;
};

// k-NN graph -> cyclic matching -> optional refinement -> clusterer, for the
// records of one modality. An empty modality yields an empty assignment.
ModalityRun run_modality(std::span<const ObservationRecord> records, Modality m, const ModalityPipeline& pipeline);

std::array<ModalityRun, kModalityCount> run_all_modalities(std::span<const ObservationRecord> records,
                                                           const PipelineConfig& config);

}  // namespace chargroup
