#include "dynamatch/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace dynamatch {

namespace {
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}
}  // namespace

Engine::Engine(std::uint32_t n, EngineParams params)
    : n_(n),
      params_(params),
      g_(n),
      m_most_(n),
      m_base_(n),
      m_adj_(n),
      in_vadj_(n, 0),
      med_prev_(n, kNoVertex),
      med_next_(n, kNoVertex),
      fmed_prev_(n, kNoVertex),
      fmed_next_(n, kNoVertex),
      e_new_(n) {
  if (params_.cap_b < 2 || params_.cap_b > n) throw InvalidParams("engine needs 2 <= B <= n");
  if (!(params_.eps > 0.0 && params_.eps < 1.0)) throw InvalidParams("eps must lie in (0,1)");
  if (params_.delta() * n < 1.0) throw InvalidParams("delta * n must be at least 1");
  phase_len_ = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(params_.delta() * static_cast<double>(n) + 1e-9));
  double xv = params_.x_value();
  if (xv < 1.0) throw InvalidParams("degree-gap threshold X must be >= 1");
  x_int_ = static_cast<std::uint32_t>(std::ceil(xv - 1e-9));
  edcs_ = std::make_unique<EdcsState>(g_, params_.cap_b, params_.eps);
  band_.assign(n_, NodeBand::Lo);
  vhi_.assign(n_, 0);
  alo_.assign(n_, 0);
  damaged_.assign(n_, 0);
  start_phase();
}

void Engine::classify() {
  double t_vhi = params_.thr_vhi();
  double t_hi = params_.thr_hi();
  double t_med = params_.thr_med();
  double t_alo = params_.thr_alo();
  hi_count_ = 0;
  for (VertexId v = 0; v < n_; ++v) {
    double d = h_init_->degree(v);
    vhi_[v] = 0;
    alo_[v] = 0;
    if (d + 1e-9 >= t_hi) {
      band_[v] = NodeBand::Hi;
      ++hi_count_;
      if (d > t_vhi + 1e-9) vhi_[v] = 1;
    } else if (d + 1e-9 >= t_med) {
      band_[v] = NodeBand::Med;
      if (d <= t_alo + 1e-9) alo_[v] = 1;
    } else {
      band_[v] = NodeBand::Lo;
    }
  }
}

void Engine::start_phase() {
  pull_lpm_counters();
  if (lpm_) {
    lpm_work_baseline_ += lpm_->work();
    walk_baseline_ += lpm_->walk_steps();
    ew_baseline_ += lpm_->epoch_weight_violations();
    es_lbl_baseline_ += lpm_->label_changes();
    lpm_.reset();
  }
  ++counters_.phase_inits;
  ++phase_number_;
  update_in_phase_ = 0;

  h_init_ = std::make_unique<DynGraph>(edcs_->subgraph());
  h_core_ = std::make_unique<DynGraph>(*h_init_);
  e_new_ = DynGraph(n_);
  classify();
  damaged_.assign(n_, 0);
  dmg_list_.clear();
  f_adj_.clear();

  // Trim very-high vertices down to the static degree cap; trimmed edges lose
  // only low endpoints, so no medium or high degree drops.
  DynGraph hprime(*h_init_);
  auto cap_int = static_cast<std::uint32_t>(params_.delta_static() + 1e-9);
  for (VertexId v = 0; v < n_; ++v) {
    if (!vhi_[v]) continue;
    while (hprime.degree(v) > cap_int) {
      hprime.remove_edge(v, hprime.kth_neighbor(v, 0));
    }
  }
  counters_.init_work += hprime.edge_count() + n_;

  MatchMostParams mp;
  mp.delta_cap = params_.delta_static();
  mp.kappa = params_.kappa();
  mp.seed = mix_seed(params_.seed, phase_number_);
  mp.mode = params_.backend == LpmBackend::Randomized ? MatchMostMode::Randomized
                                                      : MatchMostMode::Deterministic;
  if (mp.mode == MatchMostMode::Randomized && mp.delta_cap < 4.0 / mp.kappa) {
    mp.mode = MatchMostMode::Deterministic;  // padding precondition unavailable at this scale
  }
  m_most_ = match_most(hprime, mp);
  counters_.matchmost_edges += hprime.edge_count();
  m_base_ = m_most_;

  if (hi_count_ > 0) {
    DegreeGapGraph hilo(n_, x_int_, params_.gamma_value());
    for (VertexId v = 0; v < n_; ++v) {
      if (is_hi(v)) {
        hilo.set_side(v, DegreeGapGraph::Side::Left);
      } else if (band_[v] == NodeBand::Lo || alo_[v]) {
        hilo.set_side(v, DegreeGapGraph::Side::Right);
      }
    }
    for (VertexId v = 0; v < n_; ++v) {
      if (!is_hi(v)) continue;
      h_core_->for_neighbors(v, [&](VertexId w) { hilo.add_edge(v, w); });
    }
    Matching m0(n_);
    for (VertexId v = 0; v < n_; ++v) {
      if (is_hi(v) && m_base_.is_matched(v)) m0.match(v, m_base_.mate(v));
    }
    LpmConfig lc = params_.lpm;
    lc.seed = mix_seed(params_.seed, phase_number_ ^ 0xabcdef);
    lpm_ = make_lpm(params_.backend, std::move(hilo), m0, lc);

    UpdateCtx scratch;
    for (VertexId v = 0; v < n_; ++v) {
      if (is_hi(v) && !lpm_->matching().is_matched(v)) match_via_augment(scratch, v);
    }
  }

  // Rebuild the adjunct side from scratch against the fresh base matching.
  m_adj_.clear();
  med_head_ = kNoVertex;
  fmed_head_ = kNoVertex;
  std::fill(med_prev_.begin(), med_prev_.end(), kNoVertex);
  std::fill(med_next_.begin(), med_next_.end(), kNoVertex);
  std::fill(fmed_prev_.begin(), fmed_prev_.end(), kNoVertex);
  std::fill(fmed_next_.begin(), fmed_next_.end(), kNoVertex);
  med_in_adj_ = 0;
  free_med_count_ = 0;
  for (VertexId v = 0; v < n_; ++v) in_vadj_[v] = m_base_.is_matched(v) ? 0 : 1;
  for (VertexId v = n_; v-- > 0;) {
    if (in_vadj_[v] && is_med(v)) {
      medlist_insert(v);
      freemed_insert(v);
    }
  }
  for (VertexId v = 0; v < n_; ++v) {
    if (!in_vadj_[v] || m_adj_.is_matched(v)) continue;
    VertexId w = find_free_neighbor(v);
    if (w != kNoVertex) insert_madj(v, w);
  }
}

void Engine::medlist_insert(VertexId v) {
  med_prev_[v] = kNoVertex;
  med_next_[v] = med_head_;
  if (med_head_ != kNoVertex) med_prev_[med_head_] = v;
  med_head_ = v;
  ++med_in_adj_;
}

void Engine::medlist_erase(VertexId v) {
  if (med_prev_[v] != kNoVertex) {
    med_next_[med_prev_[v]] = med_next_[v];
  } else {
    med_head_ = med_next_[v];
  }
  if (med_next_[v] != kNoVertex) med_prev_[med_next_[v]] = med_prev_[v];
  med_prev_[v] = med_next_[v] = kNoVertex;
  --med_in_adj_;
}

void Engine::freemed_insert(VertexId v) {
  fmed_prev_[v] = kNoVertex;
  fmed_next_[v] = fmed_head_;
  if (fmed_head_ != kNoVertex) fmed_prev_[fmed_head_] = v;
  fmed_head_ = v;
  ++free_med_count_;
}

void Engine::freemed_erase(VertexId v) {
  if (fmed_prev_[v] != kNoVertex) {
    fmed_next_[fmed_prev_[v]] = fmed_next_[v];
  } else {
    fmed_head_ = fmed_next_[v];
  }
  if (fmed_next_[v] != kNoVertex) fmed_prev_[fmed_next_[v]] = fmed_prev_[v];
  fmed_prev_[v] = fmed_next_[v] = kNoVertex;
  --free_med_count_;
}

void Engine::note_mbase(UpdateCtx& ctx, VertexId v) {
  ctx.mbase_before.emplace(v, m_base_.is_matched(v));
}

void Engine::mbase_match(UpdateCtx& ctx, VertexId a, VertexId b) {
  note_mbase(ctx, a);
  note_mbase(ctx, b);
  m_base_.match(a, b);
}

void Engine::mbase_unmatch(UpdateCtx& ctx, VertexId a, VertexId b) {
  note_mbase(ctx, a);
  note_mbase(ctx, b);
  m_base_.unmatch(a, b);
}

void Engine::insert_damaged(UpdateCtx& ctx, VertexId v) {
  damaged_[v] = 1;
  dmg_list_.push_back(v);
  if (m_base_.is_matched(v)) mbase_unmatch(ctx, v, m_base_.mate(v));
}

void Engine::match_via_augment(UpdateCtx& ctx, VertexId v) {
  std::vector<VertexId> path = lpm_->augment(v);
  ++counters_.lpm_augments;
  VertexId terminal = path.back();
  if (m_base_.is_matched(terminal)) mbase_unmatch(ctx, terminal, m_base_.mate(terminal));
  for (std::size_t i = 1; i + 1 < path.size(); i += 2) mbase_unmatch(ctx, path[i], path[i + 1]);
  for (std::size_t i = 0; i + 1 < path.size(); i += 2) mbase_match(ctx, path[i], path[i + 1]);
}

void Engine::became_adj_free(UpdateCtx& ctx, VertexId v) {
  (void)ctx;
  if (is_med(v)) freemed_insert(v);
  for (VertexId w : dmg_list_) {
    ++counters_.fadj_ops;
    if (w != v && g_.has_edge(v, w)) f_adj_[w].insert(v);
  }
}

void Engine::stopped_being_adj_free(VertexId v) {
  if (is_med(v)) freemed_erase(v);
  for (VertexId w : dmg_list_) {
    ++counters_.fadj_ops;
    if (w != v) f_adj_[w].erase(v);
  }
}

void Engine::insert_madj(VertexId a, VertexId b) {
  stopped_being_adj_free(a);
  stopped_being_adj_free(b);
  m_adj_.match(a, b);
}

void Engine::remove_madj_edge(UpdateCtx& ctx, VertexId a, VertexId b) {
  m_adj_.unmatch(a, b);
  for (VertexId p : {a, b}) {
    if (in_vadj(p)) {
      became_adj_free(ctx, p);
      ctx.rematch.push_back(p);
    }
  }
}

void Engine::do_enter_vadj(UpdateCtx& ctx, VertexId v) {
  in_vadj_[v] = 1;
  if (is_med(v)) medlist_insert(v);
  if (damaged_[v]) {
    auto& fs = f_adj_[v];
    fs.clear();
    g_.for_neighbors(v, [&](VertexId w) {
      ++counters_.fadj_ops;
      if (in_vadj(w) && !m_adj_.is_matched(w)) fs.insert(w);
    });
  }
  became_adj_free(ctx, v);
  ctx.rematch.push_back(v);
}

void Engine::do_exit_vadj(UpdateCtx& ctx, VertexId v) {
  bool was_free = !m_adj_.is_matched(v);
  in_vadj_[v] = 0;
  if (is_med(v)) medlist_erase(v);
  if (was_free) {
    if (is_med(v)) freemed_erase(v);
    for (VertexId w : dmg_list_) {
      ++counters_.fadj_ops;
      if (w != v) f_adj_[w].erase(v);
    }
  } else {
    VertexId y = m_adj_.mate(v);
    m_adj_.unmatch(v, y);
    became_adj_free(ctx, y);
    ctx.rematch.push_back(y);
  }
}

void Engine::process_transitions(UpdateCtx& ctx) {
  for (const auto& [v, before] : ctx.mbase_before) {
    bool now = m_base_.is_matched(v);
    if (now && in_vadj(v)) {
      do_exit_vadj(ctx, v);
    } else if (!now && !in_vadj(v)) {
      do_enter_vadj(ctx, v);
    }
  }
}

void Engine::run_rematch_queue(UpdateCtx& ctx) {
  if (params_.fault_skip_rematch_at && *params_.fault_skip_rematch_at == counters_.updates) {
    return;  // injected fault: drop the rematch work of this update
  }
  for (std::size_t i = 0; i < ctx.rematch.size(); ++i) {
    VertexId v = ctx.rematch[i];
    if (!in_vadj(v) || m_adj_.is_matched(v)) continue;
    VertexId w = find_free_neighbor(v);
    if (w != kNoVertex) insert_madj(v, w);
  }
}

VertexId Engine::find_free_neighbor(VertexId v) {
  if (damaged_[v]) {
    ++counters_.adj_scans;
    auto it = f_adj_.find(v);
    if (it == f_adj_.end() || it->second.empty()) return kNoVertex;
    return *it->second.begin();
  }
  std::uint64_t structured_cost = static_cast<std::uint64_t>(h_init_->degree(v)) +
                                  free_med_count_ + dmg_list_.size() + e_new_.degree(v);
  VertexId found = kNoVertex;
  if (g_.degree(v) <= structured_cost) {
    g_.for_neighbors_while(v, [&](VertexId w) {
      ++counters_.adj_scans;
      if (in_vadj(w) && !m_adj_.is_matched(w)) {
        found = w;
        return false;
      }
      return true;
    });
    return found;
  }
  // Structured scan: surviving snapshot edges to low/almost-low partners,
  // then the free medium list, damaged vertices, and this phase's new edges.
  h_init_->for_neighbors_while(v, [&](VertexId w) {
    ++counters_.adj_scans;
    if (in_vadj(w) && !m_adj_.is_matched(w) && g_.has_edge(v, w)) {
      found = w;
      return false;
    }
    return true;
  });
  if (found != kNoVertex) return found;
  for (VertexId w = fmed_head_; w != kNoVertex; w = fmed_next_[w]) {
    ++counters_.adj_scans;
    if (w != v && g_.has_edge(v, w)) return w;
  }
  for (VertexId w : dmg_list_) {
    ++counters_.adj_scans;
    if (w != v && !m_adj_.is_matched(w) && g_.has_edge(v, w)) return w;
  }
  e_new_.for_neighbors_while(v, [&](VertexId w) {
    ++counters_.adj_scans;
    if (in_vadj(w) && !m_adj_.is_matched(w)) {
      found = w;
      return false;
    }
    return true;
  });
  return found;
}

void Engine::handle_insert(UpdateCtx& ctx, VertexId u, VertexId v) {
  g_.insert_edge(u, v);
  auto changes = edcs_->on_update(UpdateEvent::insert(u, v));
  counters_.h_flips += changes.size();
  e_new_.insert_edge(u, v);
  if (in_vadj(u) && in_vadj(v)) {
    bool fu = !m_adj_.is_matched(u);
    bool fv = !m_adj_.is_matched(v);
    if (fu && fv) {
      insert_madj(u, v);
    } else {
      if (damaged_[u] && fv) f_adj_[u].insert(v);
      if (damaged_[v] && fu) f_adj_[v].insert(u);
    }
  }
  process_transitions(ctx);
  run_rematch_queue(ctx);
}

void Engine::handle_delete(UpdateCtx& ctx, VertexId u, VertexId v) {
  g_.remove_edge(u, v);
  auto changes = edcs_->on_update(UpdateEvent::erase(u, v));
  counters_.h_flips += changes.size();

  bool was_new = e_new_.has_edge(u, v);
  if (was_new) {
    e_new_.remove_edge(u, v);
  } else if (h_core_->has_edge(u, v)) {
    if (m_base_.has_pair(u, v)) mbase_unmatch(ctx, u, v);
    h_core_->remove_edge(u, v);
    VertexId h = is_hi(u) ? u : (is_hi(v) ? v : kNoVertex);
    if (h != kNoVertex) {
      VertexId other = h == u ? v : u;
      bool was_damaged = damaged_[h];
      if (!was_damaged && h_core_->degree(h) < x_int_) insert_damaged(ctx, h);
      if (!was_damaged) {
        // Previously-damaged vertices are already tombstoned inside the LPM
        // with their edges dropped; only live ones still track this edge.
        LpmDeleteResult res = lpm_->erase_edge(h, other);
        ++counters_.lpm_deletes;
        if (res.left_tombstoned != (damaged_[h] != 0)) {
          throw AuditFailure("damage classification diverged from the LPM tombstone");
        }
        if (!damaged_[h] && !lpm_->matching().is_matched(h)) match_via_augment(ctx, h);
      }
    }
  }

  process_transitions(ctx);
  if (in_vadj(u) && in_vadj(v)) {
    if (m_adj_.has_pair(u, v)) {
      remove_madj_edge(ctx, u, v);
    } else {
      if (damaged_[u]) f_adj_[u].erase(v);
      if (damaged_[v]) f_adj_[v].erase(u);
    }
  }
  run_rematch_queue(ctx);
}

void Engine::finish_update(UpdateCtx& ctx) {
  std::uint32_t recourse = 0;
  for (const auto& [v, before] : ctx.mbase_before) {
    if (m_base_.is_matched(v) != before) ++recourse;
  }
  counters_.mbase_node_changes += recourse;
  counters_.max_recourse = std::max(counters_.max_recourse, recourse);
  pull_lpm_counters();
  if (recourse > params_.recourse_cap) {
    std::ostringstream os;
    os << "update changed " << recourse << " base-matching vertices (cap "
       << params_.recourse_cap << ")";
    throw RecourseExceeded(os.str());
  }
  if (++update_in_phase_ >= phase_len_) start_phase();
}

void Engine::handle_update(const UpdateEvent& e) {
  if (e.u == e.v || e.u >= n_ || e.v >= n_) throw InvalidParams("bad update endpoints");
  ++counters_.updates;
  UpdateCtx ctx;
  if (e.kind == UpdateKind::Insert) {
    handle_insert(ctx, e.u, e.v);
  } else {
    handle_delete(ctx, e.u, e.v);
  }
  finish_update(ctx);
}

void Engine::pull_lpm_counters() {
  counters_.lpm_work = lpm_work_baseline_ + (lpm_ ? lpm_->work() : 0);
  counters_.walk_steps = walk_baseline_ + (lpm_ ? lpm_->walk_steps() : 0);
  counters_.epoch_weight_violations =
      ew_baseline_ + (lpm_ ? lpm_->epoch_weight_violations() : 0);
  counters_.es_label_changes = es_lbl_baseline_ + (lpm_ ? lpm_->label_changes() : 0);
  counters_.h_scans = edcs_->scans();
}

Matching Engine::current_matching() const {
  Matching m(n_);
  for (auto [a, b] : m_base_.edges()) m.match(a, b);
  for (auto [a, b] : m_adj_.edges()) m.match(a, b);
  return m;
}

std::vector<std::pair<VertexId, VertexId>> Engine::final_edges() const {
  auto out = m_base_.edges();
  auto adj = m_adj_.edges();
  out.insert(out.end(), adj.begin(), adj.end());
  std::sort(out.begin(), out.end());
  return out;
}

bool Engine::final_matched(VertexId v) const {
  return m_base_.is_matched(v) || m_adj_.is_matched(v);
}

VertexId Engine::final_mate(VertexId v) const {
  if (m_base_.is_matched(v)) return m_base_.mate(v);
  return m_adj_.mate(v);
}

std::vector<std::string> Engine::audit(bool expensive) const {
  std::vector<std::string> bad;
  auto complain = [&](const std::string& s) { bad.push_back(s); };

  // Maximality of the union matching.
  for (VertexId u = 0; u < n_ && bad.empty(); ++u) {
    if (final_matched(u)) continue;
    g_.for_neighbors(u, [&](VertexId w) {
      if (!final_matched(w) && bad.empty()) {
        complain("uncovered edge (" + std::to_string(u) + "," + std::to_string(w) + ")");
      }
    });
  }

  // Safe high nodes stay matched in the base matching; damaged ones free.
  for (VertexId v = 0; v < n_; ++v) {
    if (is_hi(v) && !damaged_[v] && !m_base_.is_matched(v)) {
      complain("safe high vertex " + std::to_string(v) + " unmatched in base");
    }
    if (damaged_[v] && m_base_.is_matched(v)) {
      complain("damaged vertex " + std::to_string(v) + " matched in base");
    }
    if (in_vadj(v) == m_base_.is_matched(v)) {
      complain("vadj flag out of sync at " + std::to_string(v));
    }
  }

  // Base matching must live inside the surviving snapshot and stay disjoint
  // from the adjunct matching.
  for (auto [a, b] : m_base_.edges()) {
    if (!h_core_->has_edge(a, b)) complain("base edge outside the core snapshot");
    if (m_adj_.is_matched(a) || m_adj_.is_matched(b)) complain("base/adjunct overlap");
  }
  for (auto [a, b] : m_adj_.edges()) {
    if (!g_.has_edge(a, b)) complain("adjunct edge missing from the graph");
    if (!in_vadj(a) || !in_vadj(b)) complain("adjunct edge leaves V_adj");
  }

  // The hilo matching is exactly the base matching restricted to safe highs.
  if (lpm_) {
    const Matching& mh = lpm_->matching();
    for (VertexId v = 0; v < n_; ++v) {
      bool hilo_matched = mh.is_matched(v);
      bool base_hi = false;
      if (is_hi(v) && !damaged_[v]) base_hi = m_base_.is_matched(v);
      if (is_hi(v) && hilo_matched != base_hi) {
        complain("hilo/base mismatch at high vertex " + std::to_string(v));
      }
      if (is_hi(v) && hilo_matched && mh.mate(v) != m_base_.mate(v)) {
        complain("hilo/base mate mismatch at " + std::to_string(v));
      }
    }
    std::string lerr = lpm_->validate();
    if (!lerr.empty()) complain("lpm: " + lerr);
  }

  if (expensive) {
    // Exactness of damaged free-neighbor sets.
    for (VertexId w : dmg_list_) {
      std::set<VertexId> expect;
      g_.for_neighbors(w, [&](VertexId x) {
        if (in_vadj(x) && !m_adj_.is_matched(x)) expect.insert(x);
      });
      auto it = f_adj_.find(w);
      const std::set<VertexId> empty;
      const std::set<VertexId>& got = it == f_adj_.end() ? empty : it->second;
      if (got != expect) complain("stale free set at damaged vertex " + std::to_string(w));
    }
    // Base matching as the set expression over M_most / M_hilo.
    Matching expr(n_);
    if (lpm_) {
      for (auto [a, b] : lpm_->matching().edges()) expr.match(a, b);
    }
    for (auto [a, b] : m_most_.edges()) {
      if (!g_.has_edge(a, b) || !h_core_->has_edge(a, b)) continue;  // deleted this phase
      if (damaged_[a] || damaged_[b]) continue;
      if (expr.is_matched(a) || expr.is_matched(b)) continue;
      expr.match(a, b);
    }
    auto want = expr.edges();
    auto have = m_base_.edges();
    if (want != have) complain("base matching diverged from its set expression");
    // Medium slack and damage-count bounds (vacuous when above n).
    double dn = params_.delta() * n_;
    if (med_in_adj_ > std::min<double>(22.0 * dn, n_) + 1e-9) {
      complain("medium free count exceeds 22*delta*n");
    }
    double dmg_bound = 2.0 * dn / (params_.eps * params_.cap_b);
    if (dmg_list_.size() > std::min<double>(dmg_bound, n_) + 1e-9) {
      complain("damaged count exceeds 2*delta*n/(eps*B)");
    }
  }
  return bad;
}

}  // namespace dynamatch
