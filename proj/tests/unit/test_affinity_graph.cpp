#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "chargroup/affinity_graph.hpp"
#include "chargroup/parallel.hpp"
#include "chargroup/reference.hpp"

using namespace chargroup;

namespace {

FeatureMatrix angles(std::initializer_list<double> degrees) {
  std::vector<std::vector<double>> rows;
  for (double a : degrees) rows.push_back({std::cos(a * M_PI / 180), std::sin(a * M_PI / 180)});
  return FeatureMatrix::from_rows(rows);
}

std::vector<std::int32_t> ids_of(std::span<const Neighbor> ns) {
  std::vector<std::int32_t> out;
  for (const auto& n : ns) out.push_back(n.id);
  return out;
}

// a has c at rank 2 while c has a at rank 10.
AffinityGraph rank_two_vs_ten() {
  const std::size_t n = 12;
  std::vector<std::vector<Neighbor>> lists(n);
  // node 0 = a, node 1 = c
  lists[0] = {{2, 0.9}, {1, 0.8}, {3, 0.7}};
  for (std::int32_t j = 2; j <= 10; ++j) lists[1].push_back({j, 1.0 - 0.01 * j});
  lists[1].push_back({0, 0.5});
  return AffinityGraph::from_lists(lists, 10);
}

}  // namespace

TEST_CASE("knn on planar angles") {
  const auto g = build_knn_graph(angles({0, 5, 90, 180}), 2);
  CHECK(ids_of(g.neighbors(0)) == std::vector<std::int32_t>{1, 2});
  CHECK(g.neighbors(0)[0].similarity == doctest::Approx(std::cos(5 * M_PI / 180)));
}

TEST_CASE("knn degenerate inputs") {
  const auto one = build_knn_graph(angles({30}), 5);
  CHECK(one.size() == 1);
  CHECK(one.degree(0) == 0);
  const auto dup = build_knn_graph(angles({10, 10, 10}), 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(dup.neighbors(i)[0].similarity == doctest::Approx(1.0).epsilon(1e-15));
  // equal similarities resolve by ascending id
  CHECK(dup.neighbors(2)[0].id == 0);
  CHECK_THROWS_AS(build_knn_graph(FeatureMatrix::from_rows({{1, 0}, {0, 0}}), 1), std::invalid_argument);
  CHECK_THROWS_AS(build_knn_graph(angles({0, 1}), 0), std::invalid_argument);
  CHECK_THROWS_AS(build_knn_graph(FeatureMatrix(), 1), std::invalid_argument);
}

TEST_CASE("knn matches brute force up to near ties") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {7u, 33u, 130u, 301u}) {
    const auto x = oracle::random_features(rng, n, 1 + rng() % 40);
    const std::size_t k = 1 + rng() % 12;
    const auto g = build_knn_graph(x, k);
    const auto want = oracle::brute_knn(x, k);
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(g.degree(i) == want[i].size());
      for (std::size_t p = 0; p < want[i].size(); ++p) {
        const auto got = g.neighbors(i)[p];
        CHECK(got.similarity == doctest::Approx(want[i][p].similarity).epsilon(1e-12));
        // a different id is only acceptable when the similarities tie numerically
        if (got.id != want[i][p].id) {
          CHECK(std::abs(oracle::cosine(x.row(i), x.row(got.id)) - want[i][p].similarity) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("knn kernel agrees with reference and ignores worker count") {
  std::mt19937_64 rng(5);
  const auto x = oracle::random_features(rng, 523, 37);
  const auto ref = reference::build_knn_graph(x, 9);
  set_worker_count(1);
  const auto serial = build_knn_graph(x, 9);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    REQUIRE(serial.degree(i) == ref.degree(i));
    for (std::size_t p = 0; p < ref.degree(i); ++p) {
      CHECK(serial.neighbors(i)[p].similarity == doctest::Approx(ref.neighbors(i)[p].similarity).epsilon(1e-12));
      if (serial.neighbors(i)[p].id != ref.neighbors(i)[p].id)
        CHECK(std::abs(serial.neighbors(i)[p].similarity - ref.neighbors(i)[p].similarity) < 1e-12);
    }
  }
  for (std::size_t w : {2u, 4u}) {
    set_worker_count(w);
    CHECK(build_knn_graph(x, 9) == serial);
  }
  set_worker_count(1);
}

TEST_CASE("knn similarity is symmetric bitwise") {
  std::mt19937_64 rng(7);
  const auto x = oracle::random_features(rng, 97, 19);
  const auto g = build_knn_graph(x, 96);
  for (std::size_t i = 0; i < 97; ++i)
    for (const auto& nb : g.neighbors(i)) {
      const auto back = g.neighbors(static_cast<std::size_t>(nb.id))[g.rank_of(nb.id, i) - 1];
      CHECK(back.similarity == nb.similarity);
    }
}

TEST_CASE("from_lists validation") {
  CHECK_THROWS_AS(AffinityGraph::from_lists({{{0, 0.5}}}, 1), std::invalid_argument);           // self loop
  CHECK_THROWS_AS(AffinityGraph::from_lists({{{1, 0.5}}, {}}, 0), std::invalid_argument);       // too long
  CHECK_THROWS_AS(AffinityGraph::from_lists({{{5, 0.5}}, {}}, 1), std::invalid_argument);       // id range
  CHECK_THROWS_AS(AffinityGraph::from_lists({{{1, 0.1}, {2, 0.2}}, {}, {}}, 2), std::invalid_argument);  // order
  CHECK_THROWS_AS(AffinityGraph::from_lists({{{2, 0.2}, {1, 0.2}}, {}, {}}, 2), std::invalid_argument);  // tie order
  CHECK_THROWS_AS(AffinityGraph::from_lists({{{1, 1.5}}, {}}, 1), std::invalid_argument);
}

TEST_CASE("cyclic match removes a rank-2 vs rank-10 edge at threshold 3") {
  const auto g = rank_two_vs_ten();
  REQUIRE(g.rank_of(0, 1) == 2);
  REQUIRE(g.rank_of(1, 0) == 10);
  const auto pruned = cyclic_match(g, 3);
  CHECK_FALSE(pruned.has_edge(0, 1));
  CHECK_FALSE(pruned.has_edge(1, 0));
  // with the threshold at 10 both directions pass
  CHECK(cyclic_match(g, 10).has_edge(0, 1));
}

TEST_CASE("mutual nearest pair survives threshold 1") {
  const auto g = AffinityGraph::from_lists({{{1, 0.9}}, {{0, 0.9}}, {{0, 0.1}}}, 1);
  const auto pruned = cyclic_match(g, 1);
  CHECK(pruned.has_edge(0, 1));
  CHECK(pruned.has_edge(1, 0));
  CHECK_FALSE(pruned.has_edge(2, 0));
  CHECK_THROWS_AS(cyclic_match(g, 0), std::invalid_argument);
  CHECK_THROWS_AS(cyclic_match(g, 2), std::invalid_argument);
}

TEST_CASE("cyclic match equals mutual rank oracle") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 60; ++it) {
    const std::size_t n = 2 + rng() % 80, k = 1 + rng() % 15;
    const auto lists = oracle::random_lists(rng, n, k);
    const auto g = AffinityGraph::from_lists(lists, k);
    const std::size_t r = 1 + rng() % k;
    const auto pruned = cyclic_match(g, r);
    CHECK(pruned.to_lists() == oracle::mutual_rank(lists, r));
    CHECK(pruned == reference::cyclic_match(g, r));
  }
}

TEST_CASE("cyclic match on a knn graph at r = k is mutual knn") {
  std::mt19937_64 rng(19);
  const auto x = oracle::random_features(rng, 50, 8);
  const auto want = oracle::mutual_rank(oracle::brute_knn(x, 6), 6);
  CHECK(cyclic_match(build_knn_graph(x, 6), 6).to_lists().size() == want.size());
  const auto got = cyclic_match(build_knn_graph(x, 6), 6);
  for (std::size_t i = 0; i < 50; ++i) {
    REQUIRE(got.degree(i) == want[i].size());
    for (std::size_t p = 0; p < want[i].size(); ++p) CHECK(got.neighbors(i)[p].id == want[i][p].id);
  }
}

TEST_CASE("fixpoint flag is idempotent with single pass") {
  std::mt19937_64 rng(23);
  for (int it = 0; it < 30; ++it) {
    const std::size_t n = 2 + rng() % 60, k = 1 + rng() % 10;
    const auto g = AffinityGraph::from_lists(oracle::random_lists(rng, n, k), k);
    const std::size_t r = 1 + rng() % k;
    const auto once = cyclic_match(g, r);
    CHECK(cyclic_match(once, r) == once);
    CHECK(cyclic_match(g, r, true) == once);
  }
}

TEST_CASE("graph stats") {
  CHECK(graph_stats(AffinityGraph::from_lists({{}}, 1)).edges == 0);
  CHECK(graph_stats(AffinityGraph::from_lists({{}}, 1)).mean_degree == 0);
  const auto full = AffinityGraph::from_lists({{{1, .5}, {2, .4}}, {{0, .5}, {2, .3}}, {{0, .4}, {1, .3}}}, 2);
  CHECK(graph_stats(full).edges == 6);
  std::mt19937_64 rng(29);
  const auto x = oracle::random_features(rng, 200, 5);
  const auto g = build_knn_graph(x, 10);
  CHECK(graph_stats(cyclic_match(g, 5)).mean_degree <= graph_stats(g).mean_degree);
}

TEST_CASE("graph json round trip") {
  std::mt19937_64 rng(31);
  const auto g = AffinityGraph::from_lists(oracle::random_lists(rng, 25, 6), 6);
  CHECK(graph_from_json(graph_to_json(g)) == g);
}
