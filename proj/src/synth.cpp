#include "chargroup/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "chargroup/config.hpp"

namespace chargroup {

void SynthSpec::validate() const {
  auto unit = [](double v) { return std::isfinite(v) && v >= 0 && v <= 1; };
  if (n_identities == 0 && n_shots > 0) throw ConfigError("synth: n_identities is 0 but n_shots > 0");
  if (face_dim == 0 || body_dim == 0 || voice_dim == 0) throw ConfigError("synth: embedding dims must be positive");
  if (n_shots > 0 && max_identities_per_shot == 0) throw ConfigError("synth: max_identities_per_shot must be positive");
  if (frames_per_appearance == 0) throw ConfigError("synth: frames_per_appearance must be positive");
  if (!(appearance_skew >= 0) || !std::isfinite(appearance_skew)) throw ConfigError("synth: appearance_skew must be >= 0");
  for (double s : {face_sigma, body_sigma, voice_sigma})
    if (!(s >= 0) || !std::isfinite(s)) throw ConfigError("synth: sigma must be >= 0");
  if (!(separation > 0) || separation > 1) throw ConfigError("synth: separation must lie in (0,1]");
  if (!unit(faceless_fraction)) throw ConfigError("synth: faceless_fraction must lie in [0,1]");
  if (!unit(voice_cooccurrence)) throw ConfigError("synth: voice_cooccurrence must lie in [0,1]");
  if (!unit(voice_confidence_low)) throw ConfigError("synth: voice_confidence_low must lie in [0,1]");
}

SynthSpec parse_synth_spec(const std::string& text) {
  const auto file = KeyValueFile::parse(text);
  SynthSpec s;
  auto count = [&](const std::string& key, std::size_t& into) {
    if (!file.get(key)) return;
    const auto v = file.get_int(key);
    if (v < 0) throw ConfigError(key + " must be non-negative");
    into = static_cast<std::size_t>(v);
  };
  auto real = [&](const std::string& key, double& into) {
    if (file.get(key)) into = file.get_double(key);
  };
  for (const auto& [key, value] : file.entries()) {
    static const char* known[] = {"n_identities", "face_dim", "body_dim", "voice_dim", "n_shots",
                                  "max_identities_per_shot", "frames_per_appearance", "appearance_skew",
                                  "face_sigma", "body_sigma", "voice_sigma", "separation", "faceless_fraction",
                                  "voice_cooccurrence", "clothes_change_events", "faceless_after_change",
                                  "voice_confidence_low", "seed"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw ConfigError("unknown synth key '" + key + "'");
  }
  count("n_identities", s.n_identities);
  count("face_dim", s.face_dim);
  count("body_dim", s.body_dim);
  count("voice_dim", s.voice_dim);
  count("n_shots", s.n_shots);
  count("max_identities_per_shot", s.max_identities_per_shot);
  count("frames_per_appearance", s.frames_per_appearance);
  real("appearance_skew", s.appearance_skew);
  real("face_sigma", s.face_sigma);
  real("body_sigma", s.body_sigma);
  real("voice_sigma", s.voice_sigma);
  real("separation", s.separation);
  real("faceless_fraction", s.faceless_fraction);
  real("voice_cooccurrence", s.voice_cooccurrence);
  count("clothes_change_events", s.clothes_change_events);
  if (file.get("faceless_after_change")) s.faceless_after_change = file.get_bool("faceless_after_change");
  real("voice_confidence_low", s.voice_confidence_low);
  if (file.get("seed")) s.seed = static_cast<std::uint64_t>(file.get_int("seed"));
  s.validate();
  return s;
}

std::string identity_label(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "id_%03zu", i);
  return buf;
}

namespace {

// Samples are drawn from this generator only through the helpers below so
// the stream stays identical across standard library distributions.
using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform(rng, 0, static_cast<double>(n))) % n;
}

bool bernoulli(Rng& rng, double p) { return uniform(rng, 0, 1) < p; }

// Box-Muller.
double normal(Rng& rng) {
  const double u1 = uniform(rng, 0x1.0p-53, 1.0);
  const double u2 = uniform(rng, 0, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<double> normalize(std::vector<double> v) {
  double sq = 0;
  for (double x : v) sq += x * x;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return v;
}

std::vector<double> random_direction(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  for (double& x : v) x = normal(rng);
  return normalize(std::move(v));
}

std::vector<double> make_center(const std::vector<double>& shared, Rng& rng, double separation) {
  auto own = random_direction(rng, shared.size());
  const double keep = std::sqrt(std::max(0.0, 1.0 - separation * separation));
  for (std::size_t t = 0; t < own.size(); ++t) own[t] = keep * shared[t] + separation * own[t];
  return normalize(std::move(own));
}

std::vector<double> sample_around(const std::vector<double>& center, double sigma, Rng& rng) {
  std::vector<double> v = center;
  const double scale = sigma / std::sqrt(static_cast<double>(center.size()));
  for (double& x : v) x += scale * normal(rng);
  return normalize(std::move(v));
}

struct Appearance {
  std::size_t shot;
  std::size_t identity;
  std::size_t slot;
  std::size_t slots;
};

}  // namespace

Dataset generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n_id = spec.n_identities;

  const auto face_shared = random_direction(rng, spec.face_dim);
  const auto body_shared = random_direction(rng, spec.body_dim);
  const auto voice_shared = random_direction(rng, spec.voice_dim);
  std::vector<std::vector<double>> face_center, voice_center;
  std::vector<std::vector<std::vector<double>>> body_centers(n_id);  // per identity, one per clothing phase
  for (std::size_t k = 0; k < n_id; ++k) {
    face_center.push_back(make_center(face_shared, rng, spec.separation));
    body_centers[k].push_back(make_center(body_shared, rng, spec.separation));
    voice_center.push_back(make_center(voice_shared, rng, spec.separation));
  }

  std::vector<std::size_t> order(n_id);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n_id; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  for (std::size_t e = 0; e < spec.clothes_change_events && n_id > 0; ++e)
    body_centers[order[e % n_id]].push_back(make_center(body_shared, rng, spec.separation));

  std::vector<double> weight(n_id);
  for (std::size_t k = 0; k < n_id; ++k) weight[k] = 1.0 / std::pow(static_cast<double>(k + 1), spec.appearance_skew);

  // Shot layout and cast.
  std::vector<TimeInterval> shots;
  std::vector<Appearance> appearances;
  double t = 0;
  for (std::size_t s = 0; s < spec.n_shots; ++s) {
    const double len = uniform(rng, 2.0, 6.0);
    shots.push_back({t, t + len});
    t += len;
    const std::size_t cap = std::min(spec.max_identities_per_shot, n_id);
    const std::size_t m = 1 + uniform_index(rng, cap);
    std::vector<double> w = weight;
    std::vector<std::size_t> cast;
    for (std::size_t c = 0; c < m; ++c) {
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      double target = uniform(rng, 0, total), acc = 0;
      std::size_t pick = n_id - 1;
      for (std::size_t k = 0; k < n_id; ++k) {
        acc += w[k];
        if (w[k] > 0 && acc > target) {
          pick = k;
          break;
        }
      }
      while (w[pick] == 0) pick = (pick + n_id - 1) % n_id;
      w[pick] = 0;
      cast.push_back(pick);
    }
    for (std::size_t c = 0; c < m; ++c) appearances.push_back({s, cast[c], c, m});
  }

  // Clothing phase of each appearance: an identity's appearances are split
  // into equal consecutive chunks, one per body sub-center.
  std::vector<std::size_t> total_app(n_id, 0), seen(n_id, 0);
  for (const auto& a : appearances) ++total_app[a.identity];

  Dataset out;
  ObservationId next_id = 0;
  constexpr double kFrameWidth = 1920, kFrameHeight = 1080;
  for (const auto& a : appearances) {
    const std::size_t k = a.identity;
    const std::size_t phases = body_centers[k].size();
    const std::size_t phase = std::min(phases - 1, seen[k]++ * phases / std::max<std::size_t>(1, total_app[k]));
    const bool faceless =
        (spec.faceless_after_change && phase > 0) || bernoulli(rng, spec.faceless_fraction);
    const TimeInterval shot = shots[a.shot];
    const std::string label = identity_label(k);

    const double slot_w = kFrameWidth / static_cast<double>(a.slots);
    for (std::size_t f = 0; f < spec.frames_per_appearance; ++f) {
      const auto frame = static_cast<std::int64_t>(a.shot * spec.frames_per_appearance + f);
      const double bw = slot_w * uniform(rng, 0.5, 0.8);
      const double bh = kFrameHeight * uniform(rng, 0.4, 0.7);
      const double bx = static_cast<double>(a.slot) * slot_w + uniform(rng, 0.05, 0.95) * (slot_w - bw);
      const double by = uniform(rng, 0.0, kFrameHeight - bh);
      const BBox body{bx, by, bx + bw, by + bh};

      if (!faceless) {
        const double fw = bw * uniform(rng, 0.85, 0.95);
        const double fh = bh * uniform(rng, 0.65, 0.8);
        const double fx = bx + (bw - fw) / 2;
        ObservationRecord face;
        face.id = next_id++;
        face.modality = Modality::Face;
        face.embedding = sample_around(face_center[k], spec.face_sigma, rng);
        face.shot_id = static_cast<std::int64_t>(a.shot);
        face.frame_id = frame;
        face.bbox = BBox{fx, by, fx + fw, by + fh};
        face.interval = shot;
        face.gt_label = label;
        face.confidence = uniform(rng, 0.8, 1.0);
        out.push_back(std::move(face));
      }
      ObservationRecord b;
      b.id = next_id++;
      b.modality = Modality::Body;
      b.embedding = sample_around(body_centers[k][phase], spec.body_sigma, rng);
      b.shot_id = static_cast<std::int64_t>(a.shot);
      b.frame_id = frame;
      b.bbox = body;
      b.interval = shot;
      b.gt_label = label;
      b.confidence = uniform(rng, 0.8, 1.0);
      out.push_back(std::move(b));
    }

    if (bernoulli(rng, spec.voice_cooccurrence)) {
      const double len = shot.length();
      ObservationRecord v;
      v.id = next_id++;
      v.modality = Modality::Voice;
      v.embedding = sample_around(voice_center[k], spec.voice_sigma, rng);
      v.shot_id = static_cast<std::int64_t>(a.shot);
      v.interval = {shot.start + uniform(rng, 0, 0.2) * len, shot.end - uniform(rng, 0, 0.2) * len};
      v.gt_label = label;
      v.confidence = uniform(rng, spec.voice_confidence_low, 1.0);
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace chargroup
