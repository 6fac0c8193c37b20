#include "dynamatch/lpm.hpp"

#include <set>

#include "doctest.h"
#include "testutil.hpp"

using namespace dynamatch;

namespace {

DegreeGapGraph tiny_one_left() {
  // L={0}, R={1,2}, edges (0,1),(0,2), X=2.
  DegreeGapGraph g(3, 2, 0.25);
  g.set_side(0, DegreeGapGraph::Side::Left);
  g.set_side(1, DegreeGapGraph::Side::Right);
  g.set_side(2, DegreeGapGraph::Side::Right);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  return g;
}

DegreeGapGraph two_by_two() {
  // L={0,1}, R={2,3}, edges (0,2),(1,2),(1,3).
  DegreeGapGraph g(4, 1, 0.25);
  g.set_side(0, DegreeGapGraph::Side::Left);
  g.set_side(1, DegreeGapGraph::Side::Left);
  g.set_side(2, DegreeGapGraph::Side::Right);
  g.set_side(3, DegreeGapGraph::Side::Right);
  g.add_edge(0, 2);
  g.add_edge(1, 2);
  g.add_edge(1, 3);
  return g;
}

}  // namespace

TEST_CASE("deterministic init builds the expected residual graph") {
  SUBCASE("empty initial matching") {
    auto lpm = make_lpm(LpmBackend::Deterministic, tiny_one_left(), Matching(3), {});
    auto* det = dynamic_cast<DetLpm*>(lpm.get());
    REQUIRE(det != nullptr);
    const ResidualGraph& rg = det->tree()->graph();
    VertexId t = 3;
    CHECK(rg.has_arc(0, 1));
    CHECK(rg.has_arc(0, 2));
    CHECK(rg.has_arc(1, t));
    CHECK(rg.has_arc(2, t));
    CHECK(rg.arc_count() == 4);
    CHECK(rg.arc_weight(1, t) == 1);
    CHECK(det->validate().empty());
  }
  SUBCASE("matched edge points right-to-left") {
    Matching m0(3);
    m0.match(0, 1);
    auto lpm = make_lpm(LpmBackend::Deterministic, tiny_one_left(), m0, {});
    const ResidualGraph& rg = lpm->tree()->graph();
    CHECK(rg.has_arc(1, 0));
    CHECK(rg.has_arc(0, 2));
    CHECK(rg.has_arc(2, 3));
    CHECK(rg.arc_count() == 3);
    CHECK(lpm->validate().empty());
  }
  SUBCASE("invalid initial matching rejected") {
    Matching m0(3);
    m0.match(1, 2);  // two right vertices
    CHECK_THROWS_AS(make_lpm(LpmBackend::Deterministic, tiny_one_left(), m0, {}),
                    InvalidMatching);
  }
}

TEST_CASE("delete tombstones a left vertex that falls below X") {
  for (LpmBackend backend : {LpmBackend::Deterministic, LpmBackend::Randomized}) {
    CAPTURE(backend == LpmBackend::Deterministic);
    Matching m0(3);
    m0.match(0, 1);
    auto lpm = make_lpm(backend, tiny_one_left(), m0, {});
    auto res = lpm->erase_edge(0, 1);
    CHECK(res.deleted_was_matched);
    CHECK(res.left_tombstoned);
    CHECK(lpm->graph().removed[0]);
    CHECK(lpm->matching().size() == 0);
    CHECK(lpm->graph().g.degree(0) == 0);
    CHECK(lpm->validate().empty());
  }
}

TEST_CASE("deleting an unmatched edge above X keeps the matching") {
  DegreeGapGraph g(4, 1, 0.5);
  g.set_side(0, DegreeGapGraph::Side::Left);
  g.set_side(1, DegreeGapGraph::Side::Right);
  g.set_side(2, DegreeGapGraph::Side::Right);
  g.set_side(3, DegreeGapGraph::Side::Right);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(0, 3);
  Matching m0(4);
  m0.match(0, 1);
  for (LpmBackend backend : {LpmBackend::Deterministic, LpmBackend::Randomized}) {
    auto lpm = make_lpm(backend, g, m0, {});
    auto res = lpm->erase_edge(0, 2);
    CHECK(!res.deleted_was_matched);
    CHECK(!res.left_tombstoned);
    CHECK(lpm->matching().has_pair(0, 1));
    CHECK(lpm->validate().empty());
  }
}

TEST_CASE("augment finds the unique augmenting path") {
  for (LpmBackend backend : {LpmBackend::Deterministic, LpmBackend::Randomized}) {
    CAPTURE(backend == LpmBackend::Deterministic);
    Matching m0(4);
    m0.match(1, 2);
    auto lpm = make_lpm(backend, two_by_two(), m0, {});
    auto path = lpm->augment(0);
    CHECK(path == std::vector<VertexId>{0, 2, 1, 3});
    CHECK(lpm->matching().has_pair(0, 2));
    CHECK(lpm->matching().has_pair(1, 3));
    CHECK(lpm->validate().empty());
  }
}

TEST_CASE("augment with a free neighbor is a single edge") {
  for (LpmBackend backend : {LpmBackend::Deterministic, LpmBackend::Randomized}) {
    auto lpm = make_lpm(backend, tiny_one_left(), Matching(3), {});
    auto path = lpm->augment(0);
    CHECK(path.size() == 2);
    CHECK(path[0] == 0);
    CHECK(lpm->matching().is_matched(0));
    CHECK(lpm->validate().empty());
  }
}

TEST_CASE("matched-edge deletion inserts a weighted sink arc before removal") {
  // Replay on a 6-vertex instance; distances checked against the oracle.
  Matching m0(6);
  m0.match(0, 2);
  m0.match(1, 3);
  LpmConfig cfg;
  cfg.q_ep = 100;  // keep this test inside one epoch

  // X=2: the deletion also tombstones vertex 0, and its freed mate still
  // receives a sink arc.
  DegreeGapGraph g(6, 2, 0.25);
  for (VertexId v : {0u, 1u}) g.set_side(v, DegreeGapGraph::Side::Left);
  for (VertexId v : {2u, 3u, 4u, 5u}) g.set_side(v, DegreeGapGraph::Side::Right);
  g.add_edge(0, 2);
  g.add_edge(0, 3);
  g.add_edge(1, 3);
  g.add_edge(1, 4);
  auto lpm = make_lpm(LpmBackend::Deterministic, g, m0, cfg);
  auto* det = dynamic_cast<DetLpm*>(lpm.get());
  auto res = lpm->erase_edge(0, 2);
  CHECK(res.deleted_was_matched);
  CHECK(res.left_tombstoned);
  CHECK(res.freed_right == 2);
  CHECK(det->tree()->graph().has_arc(2, 6));
  CHECK(det->validate().empty());

  // X=1: same topology, no tombstone, so the matched arc flip is exercised.
  DegreeGapGraph g2(6, 1, 0.25);
  for (VertexId v : {0u, 1u}) g2.set_side(v, DegreeGapGraph::Side::Left);
  for (VertexId v : {2u, 3u, 4u, 5u}) g2.set_side(v, DegreeGapGraph::Side::Right);
  g2.add_edge(0, 2);
  g2.add_edge(0, 3);
  g2.add_edge(1, 3);
  g2.add_edge(1, 4);
  auto lpm2 = make_lpm(LpmBackend::Deterministic, g2, m0, cfg);
  auto* det2 = dynamic_cast<DetLpm*>(lpm2.get());
  auto res2 = lpm2->erase_edge(0, 2);
  CHECK(res2.deleted_was_matched);
  CHECK(!res2.left_tombstoned);
  const ResidualGraph& rg = det2->tree()->graph();
  REQUIRE(rg.has_arc(2, 6));
  CHECK(rg.arc_weight(2, 6) >= 1);
  CHECK(det2->validate().empty());
  auto oracle = testutil::dijkstra_to_sink(rg);
  for (VertexId v = 0; v < 6; ++v) {
    if (!det2->tree()->removed(v)) CHECK(det2->tree()->dist(v) == oracle[v]);
  }
}

TEST_CASE("epoch reset fires after q_ep deletions and rebuilds unit weights") {
  testutil::Rng rng(31);
  auto g = testutil::make_gap_instance(12, 4, 0.25, rng, 0, 2);
  Matching m0 = testutil::left_perfect_matching(g);
  LpmConfig cfg;
  cfg.q_ep = 3;
  auto lpm = make_lpm(LpmBackend::Deterministic, g, m0, cfg);
  auto* det = dynamic_cast<DetLpm*>(lpm.get());
  auto edges = g.g.edges();
  std::shuffle(edges.begin(), edges.end(), rng);
  std::uint32_t deletes = 0;
  std::uint64_t resets_before = det->resets();
  for (auto [a, b] : edges) {
    if (deletes == 4) break;
    VertexId l = g.is_left(a) ? a : b;
    VertexId r = l == a ? b : a;
    if (!lpm->graph().g.has_edge(l, r) || lpm->graph().removed[l]) continue;
    auto res = lpm->erase_edge(l, r);
    ++deletes;
    if (res.freed_right != kNoVertex && !res.left_tombstoned) {
      // keep left-perfection so the instance stays meaningful
      if (!lpm->graph().removed[l] && !lpm->matching().is_matched(l)) lpm->augment(l);
    }
    if (deletes <= 3) CHECK(det->resets() == resets_before);
  }
  CHECK(deletes == 4);
  CHECK(det->resets() == resets_before + 1);  // the 4th deletion crossed q_ep
  CHECK(det->deletions_in_epoch() == 0);
  CHECK(det->max_sink_weight() <= 1);
  CHECK(det->validate().empty());
  // Post-reset distances equal a fresh Dijkstra on the rebuilt graph.
  auto oracle = testutil::dijkstra_to_sink(det->tree()->graph());
  for (VertexId v = 0; v < g.g.vertex_count(); ++v) {
    if (!det->tree()->removed(v)) CHECK(det->tree()->dist(v) == oracle[v]);
  }
}

TEST_CASE("left-perfection holds under adversarial deletions, both backends") {
  testutil::Rng rng(77);
  for (LpmBackend backend : {LpmBackend::Deterministic, LpmBackend::Randomized}) {
    for (std::uint32_t x : {4u, 8u}) {
      auto g = testutil::make_gap_instance(24, x, 0.25, rng, 0, x / 2);
      Matching m0 = testutil::left_perfect_matching(g);
      LpmConfig cfg;
      cfg.seed = rng();
      auto lpm = make_lpm(backend, g, m0, cfg);
      std::uint32_t steps = 0;
      while (steps < 180) {
        // Adversary: prefer deleting matched edges, adaptively.
        const Matching& m = lpm->matching();
        const DegreeGapGraph& cur = lpm->graph();
        VertexId dl = kNoVertex, dr = kNoVertex;
        if (rng() % 4 != 0) {
          auto lefts = cur.left_vertices(true);
          if (!lefts.empty()) {
            VertexId l = lefts[rng() % lefts.size()];
            if (m.is_matched(l)) {
              dl = l;
              dr = m.mate(l);
            }
          }
        }
        if (dl == kNoVertex) {
          auto edges = cur.g.edges();
          if (edges.empty()) break;
          auto [a, b] = edges[rng() % edges.size()];
          dl = cur.is_left(a) ? a : b;
          dr = dl == a ? b : a;
        }
        lpm->erase_edge(dl, dr);
        ++steps;
        if (!cur.removed[dl] && !m.is_matched(dl)) lpm->augment(dl);
        // Contract: every live left vertex is matched after the round.
        for (VertexId l : cur.left_vertices(true)) CHECK(m.is_matched(l));
        CHECK(lpm->validate().empty());
      }
      CHECK(lpm->epoch_weight_violations() == 0);
    }
  }
}

TEST_CASE("augmenting paths stay short when all weights are one") {
  // Freshly initialized structures have unit weights everywhere, so the
  // sink distance of any free-left query obeys the 4 ln(n)/gamma bound.
  testutil::Rng rng(123);
  std::uint32_t augments = 0;
  for (int trial = 0; trial < 20; ++trial) {
    double gamma = trial % 2 == 0 ? 0.25 : 0.125;
    auto g = testutil::make_gap_instance(20, 8, gamma, rng, 0, 4);
    Matching m0 = testutil::left_perfect_matching(g);
    std::uint32_t n_left = 20;
    double bound = std::ceil(4.0 * std::log(static_cast<double>(n_left)) / gamma) + 1.0;
    // Unmatch a left vertex with slack above X and re-augment; the applied
    // path length in edges must stay within the bound.
    auto lpm = make_lpm(LpmBackend::Deterministic, g, m0, {});
    for (VertexId l = 0; l < n_left; ++l) {
      if (lpm->graph().g.degree(l) <= lpm->graph().x) continue;
      lpm->erase_edge(l, lpm->matching().mate(l));
      REQUIRE(!lpm->graph().removed[l]);
      auto path = lpm->augment(l);
      ++augments;
      CHECK(static_cast<double>(path.size() - 1) <= bound);
      break;
    }
  }
  CHECK(augments >= 15);  // nearly every trial has a slack vertex
}

TEST_CASE("random walk hits quickly on gap instances") {
  testutil::Rng rng(2024);
  auto g = testutil::make_gap_instance(16, 6, 0.25, rng);
  Matching m0 = testutil::left_perfect_matching(g);
  // Free one left vertex so walks from it have a target.
  VertexId l0 = 0;
  VertexId r0 = m0.mate(l0);
  m0.unmatch(l0, r0);
  LpmConfig cfg;
  cfg.seed = 555;
  RandLpm lpm(g, m0, cfg);
  std::uint64_t hits = 0, trials = 1000;
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto p = lpm.random_alternating_walk(l0, lpm.step_budget());
    if (p) {
      ++hits;
      // Walk output is a valid alternating path: odd length, free endpoint.
      CHECK(p->size() % 2 == 0);
      CHECK(!lpm.matching().is_matched(p->back()));
      CHECK(p->front() == l0);
    }
  }
  double rate = static_cast<double>(hits) / trials;
  CHECK(rate >= 0.25 / 8.0);
}

TEST_CASE("augment refuses misuse") {
  auto lpm = make_lpm(LpmBackend::Deterministic, tiny_one_left(), Matching(3), {});
  lpm->augment(0);
  CHECK_THROWS_AS(lpm->augment(0), InvalidParams);  // already matched
  CHECK_THROWS_AS(lpm->augment(1), InvalidParams);  // right vertex
}
