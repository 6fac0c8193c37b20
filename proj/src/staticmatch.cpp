#include "dynamatch/staticmatch.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

namespace dynamatch {

std::vector<std::vector<std::pair<VertexId, VertexId>>> EdgeColoring::classes() const {
  std::vector<std::vector<std::pair<VertexId, VertexId>>> out(num_colors);
  for (auto [u, v, c] : edges) out[c].emplace_back(u, v);
  return out;
}

namespace {

// Working state for the Misra-Gries style coloring. col[v][c] is the
// neighbor matched to v through color c, or kNoVertex.
class Colorer {
 public:
  Colorer(const DynGraph& g, std::uint32_t maxdeg)
      : g_(g), palette_(maxdeg + 1), col_(g.vertex_count()) {
    for (auto& row : col_) row.assign(palette_, kNoVertex);
  }

  void run() {
    for (auto [u, v] : g_.edges()) color_edge(u, v);
  }

  EdgeColoring finish() {
    EdgeColoring out;
    std::uint32_t hi = 0;
    for (auto [u, v] : g_.edges()) {
      std::uint32_t c = ecol_.at(key(u, v));
      hi = std::max(hi, c + 1);
      out.edges.emplace_back(u, v, c);
    }
    out.num_colors = hi;
    return out;
  }

 private:
  static std::uint64_t key(VertexId u, VertexId v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }

  std::uint32_t free_color(VertexId v) const {
    for (std::uint32_t c = 0; c < palette_; ++c) {
      if (col_[v][c] == kNoVertex) return c;
    }
    throw Error("no free color; palette too small");
  }
  bool is_free(VertexId v, std::uint32_t c) const { return col_[v][c] == kNoVertex; }

  void set_color(VertexId u, VertexId v, std::uint32_t c) {
    if (col_[u][c] != kNoVertex || col_[v][c] != kNoVertex) {
      throw Error("edge coloring corrupted: color already in use at an endpoint");
    }
    col_[u][c] = v;
    col_[v][c] = u;
    ecol_[key(u, v)] = c;
  }
  void unset_color(VertexId u, VertexId v) {
    std::uint32_t c = ecol_.at(key(u, v));
    col_[u][c] = kNoVertex;
    col_[v][c] = kNoVertex;
    ecol_.erase(key(u, v));
  }
  std::uint32_t color_of(VertexId u, VertexId v) const { return ecol_.at(key(u, v)); }

  // Flip colors c and d along the maximal cd-path starting at u (c free at u).
  void invert_path(VertexId u, std::uint32_t c, std::uint32_t d) {
    std::vector<std::pair<VertexId, VertexId>> path_edges;
    VertexId cur = u;
    std::uint32_t want = d;
    while (col_[cur][want] != kNoVertex) {
      VertexId nxt = col_[cur][want];
      path_edges.emplace_back(cur, nxt);
      cur = nxt;
      want = want == d ? c : d;
      if (path_edges.size() > ecol_.size() + 1) {
        throw Error("edge coloring corrupted: cd-path walk cycled");
      }
    }
    std::vector<std::uint32_t> old_colors;
    old_colors.reserve(path_edges.size());
    for (auto [a, b] : path_edges) old_colors.push_back(color_of(a, b));
    for (auto [a, b] : path_edges) unset_color(a, b);
    for (std::size_t i = 0; i < path_edges.size(); ++i) {
      std::uint32_t flipped = old_colors[i] == c ? d : c;
      set_color(path_edges[i].first, path_edges[i].second, flipped);
    }
  }

  void color_edge(VertexId u, VertexId v) {
    // Maximal fan of u starting at v.
    std::vector<VertexId> fan{v};
    std::size_t closing_idx = 0;  // index of the fan vertex col[u][d] when the fan closes on itself
    bool closed_on_fan = false;
    while (true) {
      std::uint32_t cf = free_color(fan.back());
      VertexId w = col_[u][cf];
      if (w == kNoVertex) break;
      auto it = std::find(fan.begin(), fan.end(), w);
      if (it != fan.end()) {
        closed_on_fan = true;
        closing_idx = static_cast<std::size_t>(it - fan.begin());
        break;
      }
      fan.push_back(w);
    }
    std::uint32_t c = free_color(u);
    std::uint32_t d = free_color(fan.back());
    if (c != d && col_[u][d] != kNoVertex) invert_path(u, c, d);

    // When the fan closed on f_x (its edge to u was colored d), the prefix
    // ending at f_{x-1} is rotated if d survived there; if the inversion
    // consumed that slot it must have ended at f_{x-1}, which re-frees c on
    // it and keeps the whole fan rotatable.
    std::size_t w_idx;
    if (!closed_on_fan) {
      w_idx = fan.size() - 1;
    } else {
      if (closing_idx == 0) throw Error("edge coloring lost its fan invariant");
      w_idx = is_free(fan[closing_idx - 1], d) ? closing_idx - 1 : fan.size() - 1;
    }
    for (std::size_t i = 0; i < w_idx; ++i) {
      std::uint32_t ci = color_of(u, fan[i + 1]);
      unset_color(u, fan[i + 1]);
      set_color(u, fan[i], ci);
    }
    set_color(u, fan[w_idx], d);
  }

  const DynGraph& g_;
  std::uint32_t palette_;
  std::vector<std::vector<VertexId>> col_;
  std::unordered_map<std::uint64_t, std::uint32_t> ecol_;
};

std::uint32_t max_degree(const DynGraph& g) {
  std::uint32_t d = 0;
  for (VertexId v = 0; v < g.vertex_count(); ++v) d = std::max(d, g.degree(v));
  return d;
}

std::uint32_t count_unmatched(const std::vector<VertexId>& front, const Matching& m) {
  std::uint32_t c = 0;
  for (VertexId v : front) {
    if (!m.is_matched(v)) ++c;
  }
  return c;
}

Matching class_to_matching(std::uint32_t n, const std::vector<std::pair<VertexId, VertexId>>& cls) {
  Matching m(n);
  for (auto [u, v] : cls) m.match(u, v);
  return m;
}

}  // namespace

EdgeColoring edge_color(const DynGraph& g) {
  Colorer c(g, max_degree(g));
  c.run();
  return c.finish();
}

std::vector<VertexId> near_cap_vertices(const DynGraph& g, double delta_cap, double kappa) {
  std::vector<VertexId> out;
  double thr = (1.0 - kappa) * delta_cap;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (static_cast<double>(g.degree(v)) + 1e-9 >= thr) out.push_back(v);
  }
  return out;
}

Matching match_most(const DynGraph& g, const MatchMostParams& params) {
  std::uint32_t n = g.vertex_count();
  std::uint32_t maxdeg = max_degree(g);
  if (params.kappa <= 0.0) throw InvalidParams("kappa must be positive");
  if (static_cast<double>(maxdeg) > params.delta_cap + 1e-9) {
    throw InvalidParams("delta_cap below the maximum degree");
  }
  std::vector<VertexId> front = near_cap_vertices(g, params.delta_cap, params.kappa);

  // With 2*kappa*n >= n the coverage bound is vacuous and the dummy padding
  // would dwarf the instance; the plain best-color-class already satisfies
  // the contract.
  bool vacuous = 2.0 * params.kappa * static_cast<double>(n) >= static_cast<double>(n);

  if (params.mode == MatchMostMode::Deterministic || vacuous) {
    EdgeColoring coloring = edge_color(g);
    auto classes = coloring.classes();
    if (classes.empty()) return Matching(n);
    std::uint32_t best = 0;
    std::uint32_t best_unmatched = kNoVertex;
    for (std::uint32_t c = 0; c < classes.size(); ++c) {
      Matching m = class_to_matching(n, classes[c]);
      std::uint32_t um = count_unmatched(front, m);
      if (um < best_unmatched) {
        best_unmatched = um;
        best = c;
      }
    }
    return class_to_matching(n, classes[best]);
  }

  // Randomized mode: dummy-extend so every near-cap vertex reaches the cap,
  // color once, then sample random classes and keep the best restriction.
  if (params.delta_cap < 4.0 / params.kappa) {
    throw InvalidParams("randomized mode needs delta_cap >= 4/kappa");
  }
  auto cap_int = static_cast<std::uint32_t>(params.delta_cap);  // pad targets use floor(cap)
  auto n_dummy = static_cast<std::uint32_t>(std::ceil(static_cast<double>(n) * params.kappa));
  n_dummy = std::max(n_dummy, 1u);
  DynGraph padded(n + n_dummy);
  for (auto [u, v] : g.edges()) padded.insert_edge(u, v);
  std::uint32_t ptr = 0;
  for (VertexId v : front) {
    std::uint32_t need = cap_int > padded.degree(v) ? cap_int - padded.degree(v) : 0;
    for (std::uint32_t i = 0; i < need; ++i) {
      // Round-robin over dummies, skipping full or already-adjacent slots.
      std::uint32_t tries = 0;
      while (tries < n_dummy) {
        VertexId dvert = n + ptr;
        ptr = (ptr + 1) % n_dummy;
        ++tries;
        if (padded.degree(dvert) >= cap_int || padded.has_edge(v, dvert)) continue;
        padded.insert_edge(v, dvert);
        break;
      }
      if (tries == n_dummy) break;  // all dummies saturated for v
    }
  }
  EdgeColoring coloring = edge_color(padded);
  auto classes = coloring.classes();
  if (classes.empty()) return Matching(n);
  std::uint32_t rounds = params.sample_rounds;
  if (rounds == 0) {
    rounds = static_cast<std::uint32_t>(std::ceil(std::log2(std::max<double>(n, 2)))) + 1;
  }
  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, coloring.num_colors - 1);
  Matching best(n);
  std::uint32_t best_unmatched = kNoVertex;
  for (std::uint32_t r = 0; r < rounds; ++r) {
    std::uint32_t c = pick(rng);
    Matching m(n);
    for (auto [u, v] : classes[c]) {
      if (u < n && v < n) m.match(u, v);  // keep only real edges
    }
    std::uint32_t um = count_unmatched(front, m);
    if (um < best_unmatched) {
      best_unmatched = um;
      best = std::move(m);
    }
  }
  return best;
}

}  // namespace dynamatch
