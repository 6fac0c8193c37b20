#pragma once

// Shared oracles and instance generators for the test suites. Everything in
// here is deliberately independent of the library's algorithmic paths: the
// oracles recompute answers from first principles (fresh Dijkstra, BFS-based
// maximum matching, exhaustive enumeration).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "dynamatch/core.hpp"
#include "dynamatch/estree.hpp"
#include "dynamatch/lpm.hpp"

namespace testutil {

using namespace dynamatch;

using Rng = std::mt19937_64;

inline DynGraph random_graph(std::uint32_t n, std::uint32_t m, Rng& rng) {
  DynGraph g(n);
  std::uniform_int_distribution<VertexId> pick(0, n - 1);
  std::uint64_t cap = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  m = static_cast<std::uint32_t>(std::min<std::uint64_t>(m, cap));
  while (g.edge_count() < m) {
    VertexId u = pick(rng), v = pick(rng);
    if (u == v || g.has_edge(u, v)) continue;
    g.insert_edge(u, v);
  }
  return g;
}

/// Fresh Dijkstra toward the sink; the independent oracle for EsTree labels.
inline std::vector<Dist> dijkstra_to_sink(const ResidualGraph& g) {
  std::vector<Dist> dist(g.vertex_count(), kUnreachable);
  using Entry = std::pair<Dist, VertexId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist[g.sink()] = 0;
  pq.push({0, g.sink()});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d != dist[v]) continue;
    for (VertexId u : g.in_tails(v)) {
      Dist cand = d + g.arc_weight(u, v);
      if (cand < dist[u]) {
        dist[u] = cand;
        pq.push({cand, u});
      }
    }
  }
  return dist;
}

/// Hopcroft–Karp over an explicit bipartition; the maximum-matching oracle.
class HopcroftKarp {
 public:
  HopcroftKarp(const DynGraph& g, const std::vector<VertexId>& left,
               const std::vector<VertexId>& right) {
    index_.assign(g.vertex_count(), kNoVertex);
    for (std::uint32_t i = 0; i < left.size(); ++i) index_[left[i]] = i;
    adj_.resize(left.size());
    left_ = left;
    for (std::uint32_t i = 0; i < left.size(); ++i) {
      adj_[i] = g.neighbors(left[i]);
    }
    (void)right;
    mate_l_.assign(left.size(), kNoVertex);
    mate_r_.assign(g.vertex_count(), kNoVertex);
  }

  std::uint32_t solve() {
    std::uint32_t matched = 0;
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::uint32_t i = 0; i < adj_.size(); ++i) {
        if (mate_l_[i] == kNoVertex) {
          visited_.assign(adj_.size(), 0);
          if (try_kuhn(i)) {
            ++matched;
            progress = true;
          }
        }
      }
    }
    return matched;
  }

  Matching matching(std::uint32_t n) const {
    Matching m(n);
    for (std::uint32_t i = 0; i < adj_.size(); ++i) {
      if (mate_l_[i] != kNoVertex) m.match(left_[i], mate_l_[i]);
    }
    return m;
  }

 private:
  bool try_kuhn(std::uint32_t i) {
    if (visited_[i]) return false;
    visited_[i] = 1;
    for (VertexId r : adj_[i]) {
      if (mate_r_[r] == kNoVertex || try_kuhn(index_[mate_r_[r]])) {
        mate_l_[i] = r;
        mate_r_[r] = left_[i];
        return true;
      }
    }
    return false;
  }

  std::vector<VertexId> left_;
  std::vector<VertexId> index_;
  std::vector<std::vector<VertexId>> adj_;
  std::vector<VertexId> mate_l_, mate_r_;
  std::vector<char> visited_;
};

/// Bipartite instance with a gamma-degree-gap at X: left ids [0, n_left),
/// right ids [n_left, n_left + n_right). Built with a configuration-model
/// style slot assignment so right degrees respect floor((1-gamma)X). Left
/// degrees are X plus up to `left_headroom` extra edges, so decremental
/// streams can chew on them before the structure removes the vertex.
inline DegreeGapGraph make_gap_instance(std::uint32_t n_left, std::uint32_t x, double gamma,
                                        Rng& rng, std::uint32_t extra_right = 0,
                                        std::uint32_t left_headroom = 0) {
  auto rcap = static_cast<std::uint32_t>((1.0 - gamma) * x);
  if (rcap == 0) throw InvalidParams("gap instance needs (1-gamma)X >= 1");
  std::uint32_t max_left_deg = x + left_headroom;
  std::uint32_t need = (n_left * max_left_deg + rcap - 1) / rcap;
  std::uint32_t n_right = need + need / 4 + extra_right + 2;
  std::uint32_t n = n_left + n_right;
  DegreeGapGraph g(n, x, gamma);
  for (VertexId v = 0; v < n_left; ++v) g.set_side(v, DegreeGapGraph::Side::Left);
  for (VertexId v = n_left; v < n; ++v) g.set_side(v, DegreeGapGraph::Side::Right);

  std::vector<std::uint32_t> room(n, 0);
  for (VertexId r = n_left; r < n; ++r) room[r] = rcap;
  std::vector<VertexId> avail;
  for (VertexId l = 0; l < n_left; ++l) {
    std::uint32_t want = x + (left_headroom > 0 ? rng() % (left_headroom + 1) : 0);
    avail.clear();
    for (VertexId r = n_left; r < n; ++r) {
      if (room[r] > 0) avail.push_back(r);
    }
    if (avail.size() < want) throw Error("gap instance ran out of right capacity");
    std::shuffle(avail.begin(), avail.end(), rng);
    for (std::uint32_t i = 0; i < want; ++i) {
      g.add_edge(l, avail[i]);
      --room[avail[i]];
    }
  }
  return g;
}

/// Left-perfect matching for a gap instance, via the maximum-matching oracle.
inline Matching left_perfect_matching(const DegreeGapGraph& g) {
  std::vector<VertexId> left = g.left_vertices(true);
  std::vector<VertexId> right = g.right_vertices();
  HopcroftKarp hk(g.g, left, right);
  std::uint32_t got = hk.solve();
  if (got != left.size()) throw Error("oracle failed to find a left-perfect matching");
  return hk.matching(g.g.vertex_count());
}

/// All subsets of edges satisfying both EDCS conditions; for tiny graphs.
inline std::vector<std::vector<std::pair<VertexId, VertexId>>> brute_force_edcs_sets(
    const DynGraph& g, std::uint32_t cap_b, double eps) {
  auto edges = g.edges();
  std::vector<std::vector<std::pair<VertexId, VertexId>>> valid;
  double lower = (1.0 - eps) * cap_b;
  for (std::uint32_t mask = 0; mask < (1u << edges.size()); ++mask) {
    std::vector<std::uint32_t> deg(g.vertex_count(), 0);
    for (std::uint32_t i = 0; i < edges.size(); ++i) {
      if ((mask >> i) & 1) {
        ++deg[edges[i].first];
        ++deg[edges[i].second];
      }
    }
    bool ok = true;
    for (std::uint32_t i = 0; i < edges.size() && ok; ++i) {
      std::uint32_t d = deg[edges[i].first] + deg[edges[i].second];
      if ((mask >> i) & 1) {
        if (d > cap_b) ok = false;
      } else if (static_cast<double>(d) + 1e-9 < lower) {
        ok = false;
      }
    }
    if (!ok) continue;
    std::vector<std::pair<VertexId, VertexId>> set;
    for (std::uint32_t i = 0; i < edges.size(); ++i) {
      if ((mask >> i) & 1) set.push_back(edges[i]);
    }
    valid.push_back(std::move(set));
  }
  return valid;
}

inline bool matching_is_maximal(const DynGraph& g, const Matching& m) {
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    if (m.is_matched(u)) continue;
    bool bad = false;
    g.for_neighbors_while(u, [&](VertexId w) {
      if (!m.is_matched(w)) {
        bad = true;
        return false;
      }
      return true;
    });
    if (bad) return false;
  }
  return true;
}

}  // namespace testutil
