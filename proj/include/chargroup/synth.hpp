#pragma once

#include <cstdint>
#include <string>

#include "chargroup/core_model.hpp"

namespace chargroup {

// Synthetic multi-modal video: a run of contiguous shots, each showing one or
// more identities side by side. Every appearance yields a face (unless the
// shot is faceless for that identity) and a body per frame, plus an optional
// voice segment inside the shot.
struct SynthSpec {
  std::size_t n_identities = 10;
  std::size_t face_dim = 64;
  std::size_t body_dim = 64;
  std::size_t voice_dim = 64;
  std::size_t n_shots = 120;
  std::size_t max_identities_per_shot = 2;
  std::size_t frames_per_appearance = 1;
  // Zipf exponent over identities for how often each one appears; 0 = uniform.
  double appearance_skew = 0.0;
  // Intra-class noise: sample = normalize(center + sigma * z), |z| ~ 1.
  double face_sigma = 0.5;
  double body_sigma = 0.6;
  double voice_sigma = 0.7;
  // Centers are normalize(sqrt(1 - s^2) * shared + s * own); s = 1 gives
  // unrelated centers, smaller s pulls identities together.
  double separation = 1.0;
  double faceless_fraction = 0.2;
  double voice_cooccurrence = 0.6;
  // Each event gives one identity a new body sub-center from some point on.
  std::size_t clothes_change_events = 2;
  // Appearances after a clothes change never show the face.
  bool faceless_after_change = false;
  double voice_confidence_low = 0.75;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

SynthSpec parse_synth_spec(const std::string& text);

// Deterministic for a given spec (seed included). Ids are 0..N-1 in
// generation order; every record carries gt_label.
Dataset generate(const SynthSpec& spec);

// Label of identity i as written into gt_label.
std::string identity_label(std::size_t i);

}  // namespace chargroup
