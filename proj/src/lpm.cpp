#include "dynamatch/lpm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dynamatch {

bool DegreeGapGraph::check_gap(std::string* why) const {
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (side[v] == Side::Left && !removed[v] && g.degree(v) < x) {
      if (why) *why = "live left vertex " + std::to_string(v) + " has degree below X";
      return false;
    }
    if (side[v] == Side::Right &&
        static_cast<double>(g.degree(v)) > (1.0 - gamma) * static_cast<double>(x) + 1e-9) {
      if (why) *why = "right vertex " + std::to_string(v) + " exceeds (1-gamma)X";
      return false;
    }
  }
  return true;
}

Lpm::Lpm(DegreeGapGraph g, const Matching& m0, LpmConfig cfg)
    : g_(std::move(g)), m_(g_.g.vertex_count()), cfg_(cfg) {
  ln_n_ = std::log(std::max<double>(g_.g.vertex_count(), 3.0));
  bind_matching(m0);
}

void Lpm::bind_matching(const Matching& m0) {
  if (m0.vertex_count() != g_.g.vertex_count()) {
    throw InvalidMatching("initial matching has wrong vertex count");
  }
  for (auto [u, v] : m0.edges()) {
    VertexId l = g_.is_left(u) ? u : v;
    VertexId r = l == u ? v : u;
    if (!g_.is_left(l) || !g_.is_right(r)) {
      throw InvalidMatching("matched pair does not cross the bipartition");
    }
    if (!g_.g.has_edge(l, r)) throw InvalidMatching("matched pair is not an edge");
    if (g_.removed[l]) throw InvalidMatching("matched pair touches a removed vertex");
    m_.match(l, r);
  }
}

std::string Lpm::validate() const {
  for (VertexId v = 0; v < g_.g.vertex_count(); ++v) {
    if (g_.removed[v] && m_.is_matched(v)) {
      return "tombstoned vertex " + std::to_string(v) + " is matched";
    }
    if (g_.removed[v] && g_.g.degree(v) != 0) {
      return "tombstoned vertex " + std::to_string(v) + " still has edges";
    }
  }
  for (auto [u, v] : m_.edges()) {
    if (!g_.g.has_edge(u, v)) {
      return "matched pair (" + std::to_string(u) + "," + std::to_string(v) + ") not an edge";
    }
  }
  return {};
}

std::unique_ptr<Lpm> make_lpm(LpmBackend backend, DegreeGapGraph g, const Matching& m0,
                              LpmConfig cfg) {
  if (backend == LpmBackend::Deterministic) {
    return std::make_unique<DetLpm>(std::move(g), m0, cfg);
  }
  return std::make_unique<RandLpm>(std::move(g), m0, cfg);
}

// ---------------------------------------------------------------------------
// Randomized backend
// ---------------------------------------------------------------------------

RandLpm::RandLpm(DegreeGapGraph g, const Matching& m0, LpmConfig cfg)
    : Lpm(std::move(g), m0, cfg),
      rng_(cfg.seed),
      on_path_(g_.g.vertex_count(), 0),
      path_pos_(g_.g.vertex_count(), 0) {
  double g2 = g_.gamma * g_.gamma;
  k_steps_ = static_cast<std::uint64_t>(std::ceil(cfg_.c1_walk * ln_n_ / g2));
  k_restarts_ = static_cast<std::uint64_t>(std::ceil(cfg_.c2_restart * ln_n_ / g_.gamma));
  k_steps_ = std::max<std::uint64_t>(k_steps_, 1);
  k_restarts_ = std::max<std::uint64_t>(k_restarts_, 1);
}

LpmDeleteResult RandLpm::erase_edge(VertexId u, VertexId v) {
  if (!g_.is_left(u)) std::swap(u, v);
  if (!g_.is_left(u) || !g_.is_right(v)) throw InvalidParams("edge does not cross the bipartition");
  if (!g_.g.has_edge(u, v)) throw MissingEdge("edge not present");
  LpmDeleteResult res;
  g_.g.remove_edge(u, v);
  if (m_.unmatch_if_pair(u, v)) {
    res.deleted_was_matched = true;
    res.freed_right = v;
  }
  if (!g_.removed[u] && g_.g.degree(u) < g_.x) {
    if (m_.is_matched(u)) {
      VertexId x = m_.mate(u);
      m_.unmatch(u, x);
      res.freed_right = x;
    }
    g_.removed[u] = 1;
    g_.g.isolate(u);  // maintain G' = G minus tombstoned left vertices
    res.left_tombstoned = true;
  }
  return res;
}

std::optional<std::vector<VertexId>> RandLpm::random_alternating_walk(VertexId u,
                                                                      std::uint64_t budget) {
  // Loop-erased random matching walk: from the current left vertex follow a
  // uniformly random incident non-matching edge; free endpoint ends the walk,
  // a matched endpoint continues from its mate. Revisiting a left vertex
  // erases the intervening cycle.
  ++stamp_;
  std::vector<VertexId> path{u};
  path_pos_[u] = 0;
  on_path_[u] = stamp_;
  VertexId cur = u;
  for (std::uint64_t steps = 0; steps < budget; ++steps) {
    std::uint32_t deg = g_.g.degree(cur);
    VertexId mate = m_.mate(cur);
    std::uint32_t free_edges = deg - (mate != kNoVertex ? 1 : 0);
    if (free_edges == 0) return std::nullopt;
    ++steps_total_;
    std::uint32_t j = std::uniform_int_distribution<std::uint32_t>(0, free_edges - 1)(rng_);
    if (mate != kNoVertex && j >= g_.g.neighbor_rank(cur, mate)) ++j;
    VertexId r = g_.g.kth_neighbor(cur, j);
    if (!m_.is_matched(r)) {
      path.push_back(r);
      return path;
    }
    VertexId nxt = m_.mate(r);
    if (on_path_[nxt] == stamp_) {
      // Cycle: drop everything after the earlier visit of nxt. Left vertices
      // sit at even positions.
      for (std::size_t i = path_pos_[nxt] + 2; i < path.size(); i += 2) on_path_[path[i]] = 0;
      path.resize(path_pos_[nxt] + 1);
    } else {
      path.push_back(r);
      path.push_back(nxt);
      on_path_[nxt] = stamp_;
      path_pos_[nxt] = static_cast<std::uint32_t>(path.size() - 1);
    }
    cur = nxt;
  }
  return std::nullopt;
}

std::vector<VertexId> RandLpm::augment(VertexId u) {
  if (!g_.is_left(u) || g_.removed[u]) throw InvalidParams("augment needs a live left vertex");
  if (m_.is_matched(u)) throw InvalidParams("augment needs a free vertex");
  if (g_.g.degree(u) < g_.x) throw InvalidParams("augment needs degree >= X");
  for (std::uint64_t attempt = 0; attempt < k_restarts_; ++attempt) {
    auto path = random_alternating_walk(u, k_steps_);
    if (path) {
      augment_along(m_, *path);
      return std::move(*path);
    }
  }
  throw NoAugmentingPath("random walk timed out after all restarts");
}

// ---------------------------------------------------------------------------
// Deterministic backend
// ---------------------------------------------------------------------------

DetLpm::DetLpm(DegreeGapGraph g, const Matching& m0, LpmConfig cfg)
    : Lpm(std::move(g), m0, cfg), affected_(g_.g.vertex_count(), 0) {
  double qd = std::sqrt(static_cast<double>(g_.g.vertex_count()) * g_.gamma);
  q_ep_ = cfg_.q_ep.value_or(std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(qd))));
  reset_es();
  resets_ = 0;  // the initial build is not a mid-stream reset
}

void DetLpm::reset_es() {
  if (tree_) {
    retired_work_ += tree_->scans() + tree_->structural_updates();
    retired_labels_ += tree_->label_changes();
  }
  ResidualGraph rg(g_.g.vertex_count() + 1, sink());
  for (VertexId l = 0; l < g_.g.vertex_count(); ++l) {
    if (!g_.is_left(l) || g_.removed[l]) continue;
    g_.g.for_neighbors(l, [&](VertexId r) {
      if (m_.mate(l) == r) {
        rg.add_arc(r, l, 1);
      } else {
        rg.add_arc(l, r, 1);
      }
    });
  }
  for (VertexId r = 0; r < g_.g.vertex_count(); ++r) {
    if (g_.is_right(r) && !m_.is_matched(r)) rg.add_arc(r, sink(), 1);
  }
  tree_ = std::make_unique<EsTree>(std::move(rg));
  num_deletions_ = 0;
  std::fill(affected_.begin(), affected_.end(), 0);
  r_aff_.clear();
  max_sink_weight_ = 1;
  ++resets_;
}

void DetLpm::add_sink_arc(VertexId r) {
  Dist d = tree_->dist(r);
  if (d == kUnreachable) {
    throw AuditFailure("freed right vertex is unreachable; degree gap must have been violated");
  }
  auto w = static_cast<std::uint32_t>(d);
  tree_->insert_arc(r, sink(), std::max<std::uint32_t>(w, 1));
  if (!affected_[r]) {
    affected_[r] = 1;
    r_aff_.push_back(r);
  }
  max_sink_weight_ = std::max<Dist>(max_sink_weight_, w);
  double bound =
      (static_cast<double>(r_aff_.size()) + 1.0) * cfg_.c_len * ln_n_ / g_.gamma;
  if (static_cast<double>(w) > bound) ++weight_violations_;
}

LpmDeleteResult DetLpm::erase_edge(VertexId u, VertexId v) {
  if (!g_.is_left(u)) std::swap(u, v);
  if (!g_.is_left(u) || !g_.is_right(v)) throw InvalidParams("edge does not cross the bipartition");
  if (!g_.g.has_edge(u, v)) throw MissingEdge("edge not present");

  LpmDeleteResult res;
  ++num_deletions_;
  bool was_matched = m_.has_pair(u, v);
  g_.g.remove_edge(u, v);
  if (was_matched) {
    m_.unmatch(u, v);
    res.deleted_was_matched = true;
    res.freed_right = v;
  }
  VertexId mate_x = kNoVertex;
  bool tombstoning = !g_.removed[u] && g_.g.degree(u) < g_.x;
  if (tombstoning) {
    if (m_.is_matched(u)) {
      mate_x = m_.mate(u);
      m_.unmatch(u, mate_x);
      res.freed_right = mate_x;
    }
    g_.removed[u] = 1;
    res.left_tombstoned = true;
  }

  if (num_deletions_ > q_ep_) {
    if (tombstoning) g_.g.isolate(u);
    reset_es();
    res.reset_performed = true;
    return res;
  }

  // Incremental residual maintenance. Sink arcs are inserted with the freed
  // vertex's pre-deletion distance, before the structural removals, so the
  // insertion never lowers a distance.
  if (tombstoning) {
    if (was_matched) {
      add_sink_arc(v);
    } else if (mate_x != kNoVertex) {
      add_sink_arc(mate_x);
    }
    tree_->remove_vertex(u);
    g_.g.isolate(u);
  } else if (was_matched) {
    add_sink_arc(v);
    tree_->delete_arc(v, u);
  } else {
    tree_->delete_arc(u, v);
  }
  return res;
}

std::vector<VertexId> DetLpm::augment(VertexId u) {
  if (!g_.is_left(u) || g_.removed[u]) throw InvalidParams("augment needs a live left vertex");
  if (m_.is_matched(u)) throw InvalidParams("augment needs a free vertex");
  if (g_.g.degree(u) < g_.x) throw InvalidParams("augment needs degree >= X");
  if (tree_->dist(u) == kUnreachable) {
    throw NoAugmentingPath("sink unreachable from the free left vertex");
  }
  std::vector<VertexId> full = tree_->path_to_sink(u);
  full.pop_back();  // strip the sink
  augment_along(m_, full);

  // Flip the path in the residual graph: insert every reverse arc (valid,
  // they sit on shortest-path tree edges), then delete the originals, then
  // retire the now-matched terminal's sink arc.
  for (std::size_t i = 0; i + 1 < full.size(); ++i) {
    tree_->insert_arc(full[i + 1], full[i], 1);
  }
  for (std::size_t i = 0; i + 1 < full.size(); ++i) {
    tree_->delete_arc(full[i], full[i + 1]);
  }
  tree_->delete_arc(full.back(), sink());
  return full;
}

std::uint64_t DetLpm::work() const {
  return retired_work_ + (tree_ ? tree_->scans() + tree_->structural_updates() : 0);
}

std::string DetLpm::validate() const {
  std::string base = Lpm::validate();
  if (!base.empty()) return base;

  // The residual graph must be exactly the encoding of (G, M) on live
  // vertices: unmatched edges left->right, matched edges right->left, one
  // sink arc per free right vertex. Sink weights may exceed 1 only for
  // vertices affected in the current epoch.
  const ResidualGraph& rg = tree_->graph();
  std::uint64_t expected_arcs = 0;
  for (VertexId l = 0; l < g_.g.vertex_count(); ++l) {
    if (!g_.is_left(l) || g_.removed[l]) continue;
    std::string err;
    g_.g.for_neighbors(l, [&](VertexId r) {
      ++expected_arcs;
      if (m_.mate(l) == r) {
        if (!rg.has_arc(r, l)) err = "missing matched arc";
      } else if (!rg.has_arc(l, r)) {
        err = "missing unmatched arc";
      }
    });
    if (!err.empty()) return err + " at left vertex " + std::to_string(l);
  }
  for (VertexId r = 0; r < g_.g.vertex_count(); ++r) {
    if (!g_.is_right(r)) continue;
    bool want_sink = !m_.is_matched(r);
    if (want_sink != rg.has_arc(r, sink())) {
      return "sink arc mismatch at right vertex " + std::to_string(r);
    }
    if (want_sink) {
      ++expected_arcs;
      if (rg.arc_weight(r, sink()) > 1 && !affected_[r]) {
        return "weighted sink arc on an unaffected vertex " + std::to_string(r);
      }
    }
  }
  if (expected_arcs != rg.arc_count()) {
    std::ostringstream os;
    os << "residual graph has " << rg.arc_count() << " arcs, expected " << expected_arcs;
    return os.str();
  }
  return {};
}

}  // namespace dynamatch
