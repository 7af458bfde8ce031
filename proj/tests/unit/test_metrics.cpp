#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "chargroup/metrics.hpp"

using namespace chargroup;
using L = std::vector<std::int64_t>;

TEST_CASE("identical partitions score 1 under relabeling") {
  const L a{0, 0, 1, 1, 2}, b{5, 5, 3, 3, 9};
  CHECK(pairwise_f(a, b).f == 1);
  CHECK(bcubed_f(a, b).f == 1);
  CHECK(nmi(a, b) == 1);
  // all singletons on both sides: no pairs at all, still identical
  const L s{0, 1, 2};
  CHECK(pairwise_f(s, s).f == 1);
}

TEST_CASE("all singleton prediction against one true cluster") {
  const L pred{0, 1, 2}, truth{0, 0, 0};
  const auto p = pairwise_f(pred, truth);
  CHECK(p.recall == 0);
  CHECK(p.f == 0);
}

TEST_CASE("six item pairwise instance matches enumeration") {
  const L pred{0, 0, 1, 1, 2, 2}, truth{0, 0, 0, 1, 1, 1};
  const auto got = pairwise_f(pred, truth);
  const auto want = oracle::pairwise(pred, truth);
  CHECK(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
  CHECK(got.recall == doctest::Approx(want.recall).epsilon(1e-12));
  CHECK(got.f == doctest::Approx(want.f).epsilon(1e-12));
  // 2 true pairs of 3 predicted, 2 of 6 true
  CHECK(got.precision == doctest::Approx(2.0 / 3));
  CHECK(got.recall == doctest::Approx(1.0 / 3));
}

TEST_CASE("bcubed half-correct cluster") {
  const L pred{0, 0, 0, 0}, truth{0, 0, 1, 1};
  CHECK(bcubed_f(pred, truth).precision == doctest::Approx(0.5));
  CHECK(bcubed_f(pred, truth).recall == doctest::Approx(1.0));
}

TEST_CASE("nmi conventions") {
  CHECK(nmi(L{0, 0, 0, 0}, L{0, 0, 1, 1}) == 0);
  CHECK(nmi(L{0, 0, 1, 1, 2, 2}, L{0, 0, 1, 1, 2, 2}) == 1);
  // independent split: pred halves each true cluster
  CHECK(nmi(L{0, 1, 0, 1}, L{0, 0, 1, 1}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("random instances match oracles") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 200; ++it) {
    const std::size_t n = 1 + rng() % 12;
    const auto pred = oracle::random_labels(rng, n, 1 + rng() % 5);
    const auto truth = oracle::random_labels(rng, n, 1 + rng() % 5);
    CHECK(pairwise_f(pred, truth).f == doctest::Approx(oracle::pairwise(pred, truth).f).epsilon(1e-9));
    CHECK(bcubed_f(pred, truth).f == doctest::Approx(oracle::bcubed(pred, truth).f).epsilon(1e-9));
    CHECK(nmi(pred, truth) == doctest::Approx(oracle::nmi(pred, truth)).epsilon(1e-9));
  }
}

TEST_CASE("negative predicted labels are singletons") {
  const L pred{-1, -1, 0, 0}, truth{0, 0, 1, 1};
  const auto want = oracle::pairwise(oracle::noise_to_singletons(pred), truth);
  CHECK(pairwise_f(pred, truth).f == doctest::Approx(want.f));
  CHECK(pairwise_f(pred, truth).recall == doctest::Approx(0.5));
}

TEST_CASE("metric input errors") {
  CHECK_THROWS_AS(pairwise_f(L{0, 1}, L{0}), std::invalid_argument);
  CHECK_THROWS_AS(nmi(L{}, L{}), std::invalid_argument);
}

namespace {

ObservationRecord visual(ObservationId id, Modality m, std::int64_t shot, const char* label) {
  ObservationRecord r;
  r.id = id;
  r.modality = m;
  r.embedding = {1, 0};
  r.shot_id = shot;
  r.frame_id = shot;
  r.bbox = BBox{0, 0, 1, 1};
  r.interval = {static_cast<double>(shot), static_cast<double>(shot) + 1};
  r.gt_label = label;
  return r;
}

}  // namespace

TEST_CASE("shot level on a hand enumerated instance") {
  // 4 shots, identities A and B. Items: (0,A) (1,A) (1,B) (2,B) (3,A).
  Dataset ds{visual(0, Modality::Face, 0, "A"), visual(1, Modality::Face, 1, "A"),
             visual(2, Modality::Body, 1, "B"), visual(3, Modality::Face, 2, "B"),
             visual(4, Modality::Body, 3, "A")};
  // character 0 claims A in shots 0,1 and B in shot 2; character 1 claims B in
  // shot 1; (3,A) is unclaimed.
  std::vector<CharacterTimeline> tl(2);
  tl[0].character_id = 0;
  tl[0].entries = {{0, {0, 1}, {Modality::Face}, {0}}, {1, {1, 2}, {Modality::Face}, {1}},
                   {2, {2, 3}, {Modality::Face}, {3}}};
  tl[1].character_id = 1;
  tl[1].entries = {{1, {1, 2}, {Modality::Body}, {2}}};
  const auto r = shot_level_eval(tl, ds);
  // items in (shot, label) order: (0,A) (1,A) (1,B) (2,B) (3,A)
  const L pred{0, 0, 1, 0, 100}, truth{0, 0, 1, 1, 0};
  CHECK(r.n_items == 5);
  CHECK(r.pairwise.f == doctest::Approx(oracle::pairwise(pred, truth).f));
  CHECK(r.bcubed.f == doctest::Approx(oracle::bcubed(pred, truth).f));
  CHECK(r.nmi == doctest::Approx(oracle::nmi(pred, truth)));
}

TEST_CASE("evaluation preconditions") {
  Dataset ds{visual(0, Modality::Face, 0, "A")};
  ds[0].gt_label.reset();
  const auto a = ClusterAssignment::from_dense({0}, {0});
  CHECK_THROWS_AS(evaluate_observations(a, ds), MissingGroundTruth);
  CHECK_THROWS_AS(shot_level_eval({}, ds), MissingGroundTruth);
  const auto unknown = ClusterAssignment::from_dense({9}, {0});
  CHECK_THROWS_AS(evaluate_observations(unknown, ds), DataError);
}
