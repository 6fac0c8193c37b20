#include "dynamatch/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace dynamatch {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Mirror of the evolving graph with O(1) uniform sampling of present edges.
class EdgePool {
 public:
  explicit EdgePool(std::uint32_t n) : g_(n) {}

  const DynGraph& graph() const { return g_; }

  void apply(const UpdateEvent& e) {
    if (e.kind == UpdateKind::Insert) {
      g_.insert_edge(e.u, e.v);
      index_[key(e.u, e.v)] = edges_.size();
      edges_.push_back({std::min(e.u, e.v), std::max(e.u, e.v)});
    } else {
      g_.remove_edge(e.u, e.v);
      auto it = index_.find(key(e.u, e.v));
      std::size_t pos = it->second;
      index_.erase(it);
      if (pos + 1 != edges_.size()) {
        edges_[pos] = edges_.back();
        index_[key(edges_[pos].first, edges_[pos].second)] = pos;
      }
      edges_.pop_back();
    }
  }

  std::uint64_t edge_count() const { return edges_.size(); }

  std::pair<VertexId, VertexId> random_edge(std::mt19937_64& rng) const {
    auto i = std::uniform_int_distribution<std::size_t>(0, edges_.size() - 1)(rng);
    return edges_[i];
  }

  std::optional<std::pair<VertexId, VertexId>> random_absent_edge(std::mt19937_64& rng) const {
    std::uint32_t n = g_.vertex_count();
    std::uint64_t all = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    if (edge_count() >= all) return std::nullopt;
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    while (true) {
      VertexId u = pick(rng), v = pick(rng);
      if (u == v || g_.has_edge(u, v)) continue;
      return std::make_pair(std::min(u, v), std::max(u, v));
    }
  }

 private:
  static std::uint64_t key(VertexId u, VertexId v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }
  DynGraph g_;
  std::vector<std::pair<VertexId, VertexId>> edges_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

std::vector<UpdateEvent> dense_base_events(const StreamSpec& spec, std::mt19937_64& rng) {
  std::vector<UpdateEvent> base;
  std::uint32_t n = spec.n;
  if (spec.star_base) {
    // Two stars plus random filler: the snapshot degrees get skewed enough
    // to produce high vertices in the maintained subgraph.
    std::uint32_t leaves = n / 3;
    for (std::uint32_t i = 2; i < 2 + leaves && i < n; ++i) base.push_back(UpdateEvent::insert(0, i));
    for (std::uint32_t i = 2 + leaves; i < 2 + 2 * leaves && i < n; ++i) {
      base.push_back(UpdateEvent::insert(1, i));
    }
    DynGraph mirror(n);
    for (const auto& e : base) mirror.insert_edge(e.u, e.v);
    std::uniform_int_distribution<VertexId> pick(0, n - 1);
    std::uint32_t extra = n / 4;
    while (extra > 0) {
      VertexId u = pick(rng), v = pick(rng);
      if (u == v || mirror.has_edge(u, v)) continue;
      mirror.insert_edge(u, v);
      base.push_back(UpdateEvent::insert(u, v));
      --extra;
    }
    return base;
  }
  std::bernoulli_distribution keep(std::min(1.0, spec.density));
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) {
      if (keep(rng)) base.push_back(UpdateEvent::insert(u, v));
    }
  }
  return base;
}

std::optional<UpdateEvent> adaptive_step(const EdgePool& pool, const MatchingView& view,
                                         std::mt19937_64& rng) {
  std::uint32_t n = pool.graph().vertex_count();
  std::uniform_int_distribution<VertexId> pick(0, n - 1);
  for (int tries = 0; tries < 64; ++tries) {
    VertexId v = pick(rng);
    if (view.matched(v)) return UpdateEvent::erase(v, view.mate(v));
  }
  for (VertexId v = 0; v < n; ++v) {
    if (view.matched(v)) return UpdateEvent::erase(v, view.mate(v));
  }
  // No matched edge; the maintained matching is empty. Refuel with inserts.
  auto e = pool.random_absent_edge(rng);
  if (!e) return std::nullopt;
  return UpdateEvent::insert(e->first, e->second);
}

class EngineView : public MatchingView {
 public:
  explicit EngineView(const Engine& e) : e_(e) {}
  bool matched(VertexId v) const override { return e_.final_matched(v); }
  VertexId mate(VertexId v) const override { return e_.final_mate(v); }

 private:
  const Engine& e_;
};

void append_matching_log(std::ostream& os, const std::vector<std::pair<VertexId, VertexId>>& es) {
  os << es.size();
  for (auto [u, v] : es) os << ' ' << u << ' ' << v;
  os << '\n';
}

}  // namespace

StreamModel stream_model_from_name(const std::string& name) {
  if (name == "random" || name == "RandomInsertDelete") return StreamModel::RandomInsertDelete;
  if (name == "dense" || name == "DecrementalFromDense") return StreamModel::DecrementalFromDense;
  if (name == "adaptive" || name == "AdaptiveMatchedEdgeDeleter") {
    return StreamModel::AdaptiveMatchedEdgeDeleter;
  }
  if (name == "file" || name == "FromFile") return StreamModel::FromFile;
  throw InvalidParams("unknown stream model: " + name);
}

std::string stream_model_name(StreamModel m) {
  switch (m) {
    case StreamModel::RandomInsertDelete: return "random";
    case StreamModel::DecrementalFromDense: return "dense";
    case StreamModel::AdaptiveMatchedEdgeDeleter: return "adaptive";
    case StreamModel::FromFile: return "file";
  }
  return "?";
}

std::vector<UpdateEvent> gen_stream(const StreamSpec& spec,
                                    const std::optional<EngineParams>& adaptive_params) {
  if (spec.n < 2 && spec.length > 0) throw InvalidParams("need at least two vertices");
  std::mt19937_64 rng(spec.seed);
  std::vector<UpdateEvent> out;

  switch (spec.model) {
    case StreamModel::FromFile: {
      std::uint32_t n = 0;
      auto events = read_stream_file(spec.path, &n);
      if (n != spec.n) throw InvalidParams("stream file vertex count mismatch");
      return events;
    }
    case StreamModel::RandomInsertDelete: {
      EdgePool pool(spec.n);
      std::bernoulli_distribution ins(spec.p_insert);
      for (std::uint64_t i = 0; i < spec.length; ++i) {
        bool do_insert = pool.edge_count() == 0 || ins(rng);
        if (do_insert) {
          auto e = pool.random_absent_edge(rng);
          if (!e) do_insert = false;
          if (e) {
            out.push_back(UpdateEvent::insert(e->first, e->second));
            pool.apply(out.back());
            continue;
          }
        }
        auto [u, v] = pool.random_edge(rng);
        out.push_back(UpdateEvent::erase(u, v));
        pool.apply(out.back());
      }
      return out;
    }
    case StreamModel::DecrementalFromDense: {
      // Build a dense base with insert events, then tear every edge down in
      // random order. `length` caps the total event count.
      auto base = dense_base_events(spec, rng);
      std::uint64_t half = spec.length / 2;
      if (base.size() > half) base.resize(half);
      out = base;
      std::vector<std::pair<VertexId, VertexId>> edges;
      edges.reserve(base.size());
      for (const auto& e : base) edges.emplace_back(e.u, e.v);
      std::shuffle(edges.begin(), edges.end(), rng);
      for (auto [u, v] : edges) out.push_back(UpdateEvent::erase(u, v));
      return out;
    }
    case StreamModel::AdaptiveMatchedEdgeDeleter: {
      // Realize the adaptive stream against an internally simulated engine so
      // the emitted file is replayable from (spec, seed).
      EngineParams ep;
      if (adaptive_params) {
        ep = *adaptive_params;
      } else {
        ep.cap_b = spec.n;
        ep.eps = 1.0 / spec.n;
        ep.seed = spec.seed;
      }
      Engine engine(spec.n, ep);
      EngineView view(engine);
      EdgePool pool(spec.n);
      auto base = dense_base_events(spec, rng);
      for (const auto& e : base) {
        engine.handle_update(e);
        pool.apply(e);
        out.push_back(e);
      }
      for (std::uint64_t i = 0; i < spec.length; ++i) {
        auto e = adaptive_step(pool, view, rng);
        if (!e) break;
        engine.handle_update(*e);
        pool.apply(*e);
        out.push_back(*e);
      }
      return out;
    }
  }
  return out;
}

void write_stream(std::ostream& os, std::uint32_t n, const std::vector<UpdateEvent>& events) {
  os << "n " << n << '\n';
  for (const auto& e : events) {
    os << (e.kind == UpdateKind::Insert ? '+' : '-') << ' ' << e.u << ' ' << e.v << '\n';
  }
}

std::vector<UpdateEvent> read_stream(std::istream& is, std::uint32_t* n) {
  std::string tag;
  if (!(is >> tag) || tag != "n") throw IoError("stream must start with 'n <count>'");
  std::uint32_t count = 0;
  if (!(is >> count)) throw IoError("bad vertex count");
  if (n) *n = count;
  std::vector<UpdateEvent> events;
  char op;
  VertexId u, v;
  while (is >> op >> u >> v) {
    if (op == '+') {
      events.push_back(UpdateEvent::insert(u, v));
    } else if (op == '-') {
      events.push_back(UpdateEvent::erase(u, v));
    } else {
      throw IoError(std::string("bad event marker: ") + op);
    }
    if (u >= count || v >= count || u == v) throw IoError("event endpoints out of range");
  }
  return events;
}

void write_stream_file(const std::string& path, std::uint32_t n,
                       const std::vector<UpdateEvent>& events) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_stream(os, n, events);
}

std::vector<UpdateEvent> read_stream_file(const std::string& path, std::uint32_t* n) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_stream(is, n);
}

std::optional<std::pair<VertexId, VertexId>> oracle_verify(const DynGraph& g, const Matching& m) {
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    if (m.is_matched(u)) continue;
    std::optional<std::pair<VertexId, VertexId>> bad;
    g.for_neighbors_while(u, [&](VertexId w) {
      if (!m.is_matched(w)) {
        bad = std::make_pair(u, w);
        return false;
      }
      return true;
    });
    if (bad) return bad;
  }
  return std::nullopt;
}

std::string metrics_to_jsonl(const RunMetrics& m) {
  std::ostringstream os;
  for (const auto& w : m.windows) {
    nlohmann::json j;
    j["type"] = "window";
    j["first_update"] = w.first_update;
    j["updates"] = w.updates;
    j["work"] = w.work;
    j["wall_ms"] = w.wall_ms;
    os << j.dump() << '\n';
  }
  nlohmann::json j;
  j["type"] = "summary";
  j["n"] = m.n;
  j["model"] = m.model;
  j["backend"] = m.backend;
  j["updates"] = m.updates;
  j["wall_ms"] = m.wall_ms;
  j["audit_failures"] = m.audit_failures;
  j["oracle_checks"] = m.oracle_checks;
  j["work_total"] = m.counters.total_work();
  j["adj_scans"] = m.counters.adj_scans;
  j["fadj_ops"] = m.counters.fadj_ops;
  j["init_work"] = m.counters.init_work;
  j["h_flips"] = m.counters.h_flips;
  j["h_scans"] = m.counters.h_scans;
  j["lpm_work"] = m.counters.lpm_work;
  j["walk_steps"] = m.counters.walk_steps;
  j["es_label_changes"] = m.counters.es_label_changes;
  j["lpm_deletes"] = m.counters.lpm_deletes;
  j["lpm_augments"] = m.counters.lpm_augments;
  j["matchmost_edges"] = m.counters.matchmost_edges;
  j["mbase_node_changes"] = m.counters.mbase_node_changes;
  j["max_recourse"] = m.counters.max_recourse;
  j["epoch_weight_violations"] = m.counters.epoch_weight_violations;
  j["phase_inits"] = m.counters.phase_inits;
  j["base_updates"] = m.base_updates;
  j["base_work"] = m.base_work;
  os << j.dump() << '\n';
  return os.str();
}

void write_metrics_file(const std::string& path, const RunMetrics& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << metrics_to_jsonl(m);
}

namespace {

struct Auditor {
  const RunConfig& cfg;
  RunMetrics& metrics;

  void check(Engine& engine, std::uint64_t idx) {
    bool full = cfg.audit == AuditLevel::Full;
    bool sampled = cfg.audit == AuditLevel::Sampled && idx % cfg.audit_stride == 0;
    if (cfg.audit == AuditLevel::Off || (!full && !sampled)) return;
    ++metrics.oracle_checks;
    Matching final = engine.current_matching();
    if (auto bad = oracle_verify(engine.graph(), final)) {
      ++metrics.audit_failures;
      throw AuditFailure("maximality violated at update " + std::to_string(idx) + " by edge (" +
                         std::to_string(bad->first) + "," + std::to_string(bad->second) + ")");
    }
    auto problems = engine.audit(false);
    bool heavy = full && idx % cfg.audit_stride == 0;
    if (heavy) {
      auto deep = engine.audit(true);
      problems.insert(problems.end(), deep.begin(), deep.end());
      auto rep = engine.edcs().validate();
      if (!rep.ok()) problems.push_back("EDCS validation failed");
    }
    if (!problems.empty()) {
      ++metrics.audit_failures;
      throw AuditFailure("invariant failed at update " + std::to_string(idx) + ": " + problems[0]);
    }
  }
};

}  // namespace

RunMetrics run(const RunConfig& cfg, std::uint32_t n, const std::vector<UpdateEvent>& events,
               const std::string& model_name) {
  RunMetrics metrics;
  metrics.n = n;
  metrics.model = model_name;
  metrics.backend = cfg.engine.backend == LpmBackend::Deterministic ? "det" : "rand";
  Engine engine(n, cfg.engine);
  Auditor auditor{cfg, metrics};
  std::ofstream log;
  if (!cfg.matching_log_path.empty()) {
    log.open(cfg.matching_log_path);
    if (!log) throw IoError("cannot open matching log for writing");
  }
  auto t0 = Clock::now();
  auto window_t0 = t0;
  std::uint64_t window_start_work = 0, window_first = 0;
  for (std::uint64_t i = 0; i < events.size(); ++i) {
    engine.handle_update(events[i]);
    ++metrics.updates;
    auditor.check(engine, i);
    if (log.is_open()) append_matching_log(log, engine.final_edges());
    if ((i + 1) % cfg.window == 0 || i + 1 == events.size()) {
      std::uint64_t work = engine.counters().total_work();
      metrics.windows.push_back(
          {window_first, i + 1 - window_first, work - window_start_work, ms_since(window_t0)});
      window_start_work = work;
      window_first = i + 1;
      window_t0 = Clock::now();
    }
  }
  metrics.counters = engine.counters();
  metrics.wall_ms = ms_since(t0);
  return metrics;
}

RunMetrics run_adaptive(const RunConfig& cfg, const StreamSpec& spec,
                        std::vector<UpdateEvent>* realized) {
  RunMetrics metrics;
  metrics.n = spec.n;
  metrics.model = "adaptive";
  metrics.backend = cfg.engine.backend == LpmBackend::Deterministic ? "det" : "rand";
  Engine engine(spec.n, cfg.engine);
  EngineView view(engine);
  EdgePool pool(spec.n);
  Auditor auditor{cfg, metrics};
  std::mt19937_64 rng(spec.seed);
  auto t0 = Clock::now();

  auto base = dense_base_events(spec, rng);
  std::uint64_t idx = 0;
  for (const auto& e : base) {
    engine.handle_update(e);
    pool.apply(e);
    if (realized) realized->push_back(e);
    auditor.check(engine, idx);
    ++idx;
  }
  metrics.base_updates = idx;
  metrics.base_work = engine.counters().total_work();

  for (std::uint64_t i = 0; i < spec.length; ++i) {
    auto e = adaptive_step(pool, view, rng);
    if (!e) break;
    engine.handle_update(*e);
    pool.apply(*e);
    if (realized) realized->push_back(*e);
    auditor.check(engine, idx);
    ++idx;
  }
  metrics.updates = idx;
  metrics.counters = engine.counters();
  metrics.wall_ms = ms_since(t0);
  return metrics;
}

void NaiveMaximal::try_match(VertexId v) {
  if (m_.is_matched(v)) return;
  VertexId found = kNoVertex;
  g_.for_neighbors_while(v, [&](VertexId w) {
    ++scans_;
    if (!m_.is_matched(w)) {
      found = w;
      return false;
    }
    return true;
  });
  if (found != kNoVertex) m_.match(v, found);
}

void NaiveMaximal::handle_update(const UpdateEvent& e) {
  if (e.kind == UpdateKind::Insert) {
    g_.insert_edge(e.u, e.v);
    ++scans_;
    if (!m_.is_matched(e.u) && !m_.is_matched(e.v)) m_.match(e.u, e.v);
    return;
  }
  g_.remove_edge(e.u, e.v);
  if (m_.unmatch_if_pair(e.u, e.v)) {
    try_match(e.u);
    try_match(e.v);
  }
}

double naive_adaptive_work(const StreamSpec& spec) {
  NaiveMaximal naive(spec.n);
  EdgePool pool(spec.n);
  std::mt19937_64 rng(spec.seed);
  auto base = dense_base_events(spec, rng);
  for (const auto& e : base) {
    naive.handle_update(e);
    pool.apply(e);
  }
  std::uint64_t base_work = naive.work();
  std::uint64_t steps = 0;
  for (std::uint64_t i = 0; i < spec.length; ++i) {
    auto e = adaptive_step(pool, naive, rng);
    if (!e) break;
    naive.handle_update(*e);
    pool.apply(*e);
    ++steps;
  }
  if (steps == 0) return 0.0;
  return static_cast<double>(naive.work() - base_work) / static_cast<double>(steps);
}

std::optional<std::uint64_t> verify_matching_log(const std::string& stream_path,
                                                 const std::string& log_path) {
  std::uint32_t n = 0;
  auto events = read_stream_file(stream_path, &n);
  std::ifstream log(log_path);
  if (!log) throw IoError("cannot open " + log_path);
  DynGraph g(n);
  std::string line;
  for (std::uint64_t i = 0; i < events.size(); ++i) {
    g.apply(events[i]);
    if (!std::getline(log, line)) return i;
    std::istringstream ls(line);
    std::size_t k = 0;
    if (!(ls >> k)) return i;
    Matching m(n);
    bool ok = true;
    for (std::size_t j = 0; j < k && ok; ++j) {
      VertexId u, v;
      if (!(ls >> u >> v) || u >= n || v >= n || !g.has_edge(u, v) || m.is_matched(u) ||
          m.is_matched(v)) {
        ok = false;
        break;
      }
      m.match(u, v);
    }
    if (!ok || oracle_verify(g, m)) return i;
  }
  return std::nullopt;
}

}  // namespace dynamatch
