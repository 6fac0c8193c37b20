#include "dynamatch/engine.hpp"

#include "doctest.h"
#include "dynamatch/harness.hpp"
#include "testutil.hpp"

using namespace dynamatch;

namespace {

EngineParams small_params(std::uint32_t n, LpmBackend backend = LpmBackend::Deterministic) {
  EngineParams p;
  p.cap_b = n;
  p.eps = 1.0 / n;
  p.backend = backend;
  p.seed = 42;
  return p;
}

// Insert filler edges among high-numbered vertices until the next update
// starts a fresh phase, so the coming snapshot sees the current graph.
void pad_to_phase_boundary(Engine& engine) {
  std::uint32_t n = engine.graph().vertex_count();
  VertexId a = 1;
  while (engine.updates_seen() % engine.phase_length() != 0) {
    while (a + 1 < n && engine.graph().has_edge(a, a + 1)) a += 2;
    REQUIRE(a + 1 < n);
    engine.handle_update(UpdateEvent::insert(a, a + 1));
    a += 2;
  }
}

void drive_and_check(Engine& engine, const std::vector<UpdateEvent>& events,
                     std::uint32_t audit_every = 1) {
  for (std::uint64_t i = 0; i < events.size(); ++i) {
    engine.handle_update(events[i]);
    if (i % audit_every == 0) {
      auto problems = engine.audit(i % (4 * audit_every) == 0);
      if (!problems.empty()) {
        CAPTURE(i);
        CAPTURE(problems[0]);
        REQUIRE(problems.empty());
      }
      CHECK(testutil::matching_is_maximal(engine.graph(), engine.current_matching()));
    }
  }
}

}  // namespace

TEST_CASE("classification thresholds match the worked arithmetic") {
  // B=1000, eps=0.001 (delta=0.1): v-hi above 600, hi at 599, med in
  // [400,599), a-lo at or below 401, lo below 400.
  EngineParams p;
  p.cap_b = 1000;
  p.eps = 0.001;
  CHECK(p.thr_vhi() == doctest::Approx(600.0));
  CHECK(p.thr_hi() == doctest::Approx(599.0));
  CHECK(p.thr_med() == doctest::Approx(400.0));
  CHECK(p.thr_alo() == doctest::Approx(401.0));
  CHECK(650.0 > p.thr_vhi());
  CHECK(450.0 >= p.thr_med());
  CHECK(450.0 > p.thr_alo());  // med but not almost-low
  CHECK(300.0 < p.thr_med());
  // Threshold ordering (well-formed whenever delta <= 1/2).
  CHECK(p.thr_med() < p.thr_alo());
  CHECK(p.thr_alo() < p.x_value());
  CHECK(p.x_value() < p.thr_hi());
  CHECK(p.thr_hi() < p.thr_vhi());
  CHECK(p.thr_vhi() <= p.cap_b);
}

TEST_CASE("low-degree graphs degenerate to pure adjunct maintenance") {
  // Path graph: every snapshot degree is tiny, the high side is empty, and
  // maximality is carried entirely by the adjunct matching.
  std::uint32_t n = 8;
  EngineParams p;
  p.cap_b = 4;
  p.eps = 0.25;  // (1-eps)B = 3 >= 1; delta*n = 200
  Engine engine(n, p);
  std::vector<UpdateEvent> events;
  for (VertexId v = 0; v + 1 < n; ++v) events.push_back(UpdateEvent::insert(v, v + 1));
  drive_and_check(engine, events);
  CHECK(engine.hi_count() == 0);
  CHECK(engine.current_matching().size() >= 3);  // maximal on a path of 8
}

TEST_CASE("maximality under random churn at several parameter points") {
  testutil::Rng rng(17);
  for (LpmBackend backend : {LpmBackend::Deterministic, LpmBackend::Randomized}) {
    std::uint32_t n = 48;
    Engine engine(n, small_params(n, backend));
    std::vector<std::pair<VertexId, VertexId>> present;
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    for (int step = 0; step < 1200; ++step) {
      bool ins = present.size() < 30 || (present.size() < 300 && rng() % 10 < 6);
      UpdateEvent e{};
      if (ins) {
        VertexId u = pick(rng), v = pick(rng);
        if (u == v || engine.graph().has_edge(u, v)) continue;
        e = UpdateEvent::insert(u, v);
        present.emplace_back(u, v);
      } else {
        std::size_t i = rng() % present.size();
        e = UpdateEvent::erase(present[i].first, present[i].second);
        present[i] = present.back();
        present.pop_back();
      }
      engine.handle_update(e);
      CHECK(testutil::matching_is_maximal(engine.graph(), engine.current_matching()));
      if (step % 16 == 0) {
        auto problems = engine.audit(true);
        CAPTURE(step);
        REQUIRE(problems.empty());
      }
    }
    CHECK(engine.counters().max_recourse <= engine.params().recourse_cap);
  }
}

TEST_CASE("star graphs produce high vertices and exercise the hilo machinery") {
  // The high threshold sits near B/2 + 100*eps*B, so with eps*B = 1 a star
  // center only classifies high once its degree clears B/2 + 99; that takes
  // a few hundred vertices.
  std::uint32_t n = 256;
  for (LpmBackend backend : {LpmBackend::Deterministic, LpmBackend::Randomized}) {
    EngineParams p = small_params(n, backend);
    p.cap_b = 250;
    p.eps = 1.0 / 250;
    Engine engine(n, p);
    std::vector<UpdateEvent> events;
    for (VertexId v = 1; v < n; ++v) events.push_back(UpdateEvent::insert(0, v));
    drive_and_check(engine, events, 16);
    pad_to_phase_boundary(engine);  // snapshot the full star
    // Keep deleting the center's matched edge; the engine must re-match the
    // center every time (the adaptive attack that breaks sampling schemes).
    std::uint32_t hi_phases = 0;
    for (int round = 0; round < 120; ++round) {
      if (engine.hi_count() > 0) ++hi_phases;
      VertexId mate = engine.final_mate(0);
      if (mate == kNoVertex) break;
      engine.handle_update(UpdateEvent::erase(0, mate));
      CHECK(testutil::matching_is_maximal(engine.graph(), engine.current_matching()));
      auto problems = engine.audit(false);
      REQUIRE(problems.empty());
      if (engine.graph().degree(0) == 0) break;
    }
    CHECK(hi_phases > 0);  // the star center classified high in some phase
  }
}

TEST_CASE("match_via_augment changes at most two base vertices per call") {
  // Measured through the per-update recourse cap on a hilo-rich stream.
  std::uint32_t n = 256;
  EngineParams p = small_params(n);
  p.cap_b = 250;
  p.eps = 1.0 / 250;
  Engine engine(n, p);
  std::vector<UpdateEvent> events;
  for (VertexId v = 1; v < n; ++v) events.push_back(UpdateEvent::insert(0, v));
  for (const auto& e : events) engine.handle_update(e);
  pad_to_phase_boundary(engine);
  std::uint64_t augments_before = engine.counters().lpm_augments;
  for (int round = 0; round < 200; ++round) {
    VertexId mate = engine.final_mate(0);
    if (mate == kNoVertex || engine.graph().degree(0) < 4) break;
    engine.handle_update(UpdateEvent::erase(0, mate));
  }
  CHECK(engine.counters().lpm_augments > augments_before);
  CHECK(engine.counters().max_recourse <= 4);
}

TEST_CASE("damaged vertices stay bounded and tracked") {
  std::uint32_t n = 48;
  EngineParams p = small_params(n);
  Engine engine(n, p);
  testutil::Rng rng(31);
  // Dense-ish base, then a decremental barrage to force damage transitions.
  std::vector<std::pair<VertexId, VertexId>> present;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < std::min(n, u + 9); ++v) {
      engine.handle_update(UpdateEvent::insert(u, v));
      present.emplace_back(u, v);
    }
  }
  std::shuffle(present.begin(), present.end(), rng);
  for (auto [u, v] : present) {
    engine.handle_update(UpdateEvent::erase(u, v));
    double dn = engine.params().delta() * n;
    double bound = 2.0 * dn / (engine.params().eps * engine.params().cap_b);
    CHECK(engine.damaged_count() <= std::min<double>(bound, n) + 1e-9);
    CHECK(testutil::matching_is_maximal(engine.graph(), engine.current_matching()));
  }
}

TEST_CASE("current matching is empty on an empty graph and disjoint always") {
  Engine engine(16, small_params(16));
  CHECK(engine.current_matching().size() == 0);
  engine.handle_update(UpdateEvent::insert(0, 1));
  engine.handle_update(UpdateEvent::insert(2, 3));
  auto m = engine.current_matching();
  CHECK(m.size() == 2);
  for (auto [u, v] : m.edges()) {
    CHECK(engine.graph().has_edge(u, v));
    CHECK(m.mate(m.mate(u)) == u);
    CHECK(m.mate(m.mate(v)) == v);
  }
}

TEST_CASE("phase start matches every safe high vertex") {
  // Two stars sharing their leaf set: both centers classify high once a
  // phase snapshots the skewed subgraph, and the left-perfect init must
  // match both, which a maximum-matching oracle confirms is feasible.
  std::uint32_t n = 256;
  EngineParams p = small_params(n);
  p.cap_b = 250;
  p.eps = 1.0 / 250;
  Engine engine(n, p);
  std::vector<UpdateEvent> events;
  for (VertexId v = 2; v < n; ++v) {
    events.push_back(UpdateEvent::insert(0, v));
    events.push_back(UpdateEvent::insert(1, v));
  }
  for (const auto& e : events) engine.handle_update(e);
  pad_to_phase_boundary(engine);
  CHECK(engine.hi_count() == 2);
  // Oracle cross-check: a matching covering both centers exists in the
  // snapshot, and the engine's base matching covers them.
  testutil::HopcroftKarp hk(engine.graph(), {0, 1}, {});
  CHECK(hk.solve() == 2);
  CHECK(engine.base_matching().is_matched(0));
  CHECK(engine.base_matching().is_matched(1));
  auto problems = engine.audit(true);
  REQUIRE(problems.empty());
  CHECK(testutil::matching_is_maximal(engine.graph(), engine.current_matching()));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(Engine(8, EngineParams{}), InvalidParams);             // B = 0
  EngineParams p;
  p.cap_b = 64;
  p.eps = 1.0 / 64;
  CHECK_THROWS_AS(Engine(32, p), InvalidParams);                          // B > n
  p.cap_b = 8;
  p.eps = 0.001;
  CHECK_THROWS_AS(Engine(8, p), InvalidParams);                           // delta*n < 1
}
