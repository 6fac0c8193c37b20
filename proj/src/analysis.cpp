#include "dynamatch/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

#include "json.hpp"

namespace dynamatch {

std::uint64_t ContractedGraph::out_degree(std::uint32_t v) const {
  std::uint64_t d = 0;
  for (const auto& a : out[v]) d += a.multiplicity;
  return d;
}

std::uint64_t ContractedGraph::in_degree(std::uint32_t v) const {
  std::uint64_t d = 0;
  for (std::uint32_t u = 0; u < vertex_count; ++u) {
    for (const auto& a : out[u]) {
      if (a.head == v) d += a.multiplicity;
    }
  }
  return d;
}

std::uint64_t ContractedGraph::volume() const {
  std::uint64_t v = 0;
  for (std::uint32_t u = 0; u < vertex_count; ++u) v += out_degree(u);
  return v;
}

void ContractedGraph::add_arc(std::uint32_t tail, std::uint32_t head, std::uint64_t mult) {
  for (auto& a : out[tail]) {
    if (a.head == head) {
      a.multiplicity += mult;
      return;
    }
  }
  out[tail].push_back({head, mult});
}

ContractedGraph contract(const DegreeGapGraph& g, const Matching& m) {
  ContractedGraph gm;
  std::vector<std::uint32_t> node_of(g.g.vertex_count(), kNoVertex);
  for (VertexId l = 0; l < g.g.vertex_count(); ++l) {
    if (!g.is_left(l) || g.removed[l] || !m.is_matched(l)) continue;
    auto id = static_cast<std::uint32_t>(gm.pair_of.size());
    gm.pair_of.emplace_back(l, m.mate(l));
    node_of[l] = id;
    node_of[m.mate(l)] = id;
  }
  gm.sink = static_cast<std::uint32_t>(gm.pair_of.size());
  gm.vertex_count = gm.sink + 1;
  gm.out.assign(gm.vertex_count, {});
  auto node = [&](VertexId v) { return node_of[v] == kNoVertex ? gm.sink : node_of[v]; };
  for (VertexId l = 0; l < g.g.vertex_count(); ++l) {
    if (!g.is_left(l) || g.removed[l]) continue;
    g.g.for_neighbors(l, [&](VertexId r) {
      std::uint32_t a = node(l), b = node(r);
      if (a == b) return;  // matched pair's own edge: self-loop, dropped
      gm.add_arc(a, b);
    });
  }
  return gm;
}

ContractedGraph eulerianize(const ContractedGraph& gm) {
  ContractedGraph out = gm;
  std::vector<std::uint64_t> indeg(out.vertex_count, 0);
  for (std::uint32_t u = 0; u < out.vertex_count; ++u) {
    for (const auto& a : out.out[u]) indeg[a.head] += a.multiplicity;
  }
  for (std::uint32_t u = 0; u < out.vertex_count; ++u) {
    if (u == out.sink) continue;
    std::uint64_t od = out.out_degree(u);
    if (od > indeg[u]) out.add_arc(out.sink, u, od - indeg[u]);
  }
  return out;
}

ConductanceReport conductance_bruteforce(const ContractedGraph& g) {
  if (g.vertex_count > 20) throw TooLarge("conductance enumeration is capped at 20 vertices");
  if (g.vertex_count < 2) throw InvalidParams("conductance needs at least two vertices");
  std::uint32_t k = g.vertex_count;
  std::vector<std::uint64_t> outdeg(k);
  for (std::uint32_t v = 0; v < k; ++v) outdeg[v] = g.out_degree(v);

  ConductanceReport best;
  bool have = false;
  for (std::uint32_t mask = 1; mask + 1 < (1u << k); ++mask) {
    std::uint64_t vol_s = 0, vol_t = 0, cut = 0;
    for (std::uint32_t v = 0; v < k; ++v) {
      bool in_s = (mask >> v) & 1;
      (in_s ? vol_s : vol_t) += outdeg[v];
      if (!in_s) continue;
      for (const auto& a : g.out[v]) {
        if (!((mask >> a.head) & 1)) cut += a.multiplicity;
      }
    }
    std::uint64_t den = std::min(vol_s, vol_t);
    if (den == 0) continue;
    // compare cut/den < best via cross multiplication
    if (!have || static_cast<unsigned __int128>(cut) * best.phi_den <
                     static_cast<unsigned __int128>(best.phi_num) * den) {
      have = true;
      best.phi_num = cut;
      best.phi_den = den;
      best.witness_cut.clear();
      for (std::uint32_t v = 0; v < k; ++v) {
        if ((mask >> v) & 1) best.witness_cut.push_back(v);
      }
    }
  }
  if (!have) throw InvalidParams("graph has no cut with positive volume on both sides");
  return best;
}

WalkHitStats walk_hit_stats(const ContractedGraph& gm, std::uint32_t v, std::uint64_t k,
                            std::uint64_t trials, std::uint64_t seed) {
  if (v >= gm.vertex_count || v == gm.sink) throw InvalidParams("walk start must be a non-sink vertex");
  std::mt19937_64 rng(seed);
  // Prefix sums per vertex for multiplicity-proportional sampling.
  std::vector<std::vector<std::uint64_t>> prefix(gm.vertex_count);
  for (std::uint32_t u = 0; u < gm.vertex_count; ++u) {
    std::uint64_t acc = 0;
    for (const auto& a : gm.out[u]) {
      acc += a.multiplicity;
      prefix[u].push_back(acc);
    }
  }
  WalkHitStats st;
  st.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint32_t cur = v;
    for (std::uint64_t step = 0; step < k; ++step) {
      if (prefix[cur].empty()) break;
      std::uint64_t total = prefix[cur].back();
      std::uint64_t pick = std::uniform_int_distribution<std::uint64_t>(0, total - 1)(rng);
      std::size_t idx =
          std::upper_bound(prefix[cur].begin(), prefix[cur].end(), pick) - prefix[cur].begin();
      cur = gm.out[cur][idx].head;
      if (cur == gm.sink) {
        ++st.hits;
        break;
      }
    }
  }
  st.rate = trials == 0 ? 0.0 : static_cast<double>(st.hits) / static_cast<double>(trials);
  if (trials > 0) {
    double z = 1.959963985;  // 95% interval
    double nn = static_cast<double>(trials);
    double p = st.rate;
    double denom = 1.0 + z * z / nn;
    double center = p + z * z / (2.0 * nn);
    double spread = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn));
    st.wilson_lo = std::max(0.0, (center - spread) / denom);
    st.wilson_hi = std::min(1.0, (center + spread) / denom);
  }
  return st;
}

LayerAudit alternating_layer_audit(const DegreeGapGraph& g, const Matching& m,
                                   const std::vector<VertexId>& r_mark) {
  std::uint32_t n = g.g.vertex_count();
  std::uint64_t live_left = 0;
  for (VertexId v = 0; v < n; ++v) {
    if (g.is_left(v) && !g.removed[v]) {
      ++live_left;
      if (!m.is_matched(v)) {
        throw NotLeftPerfect("live left vertex " + std::to_string(v) + " is unmatched");
      }
    }
  }
  std::vector<char> marked(n, 0);
  for (VertexId r : r_mark) marked[r] = 1;

  // Multi-source BFS from unmarked free right vertices, walking matched
  // edges backward. dist_l[u] = shortest alternating path length from u.
  constexpr std::uint64_t inf = ~0ull;
  std::vector<std::uint64_t> dist_l(n, inf);
  std::vector<std::uint64_t> dist_pair(n, inf);  // keyed by the left vertex of a pair
  std::deque<VertexId> queue;                    // holds left vertices of settled pairs

  // Seed: left vertices adjacent (via a non-matching edge) to a free unmarked
  // right vertex get distance 1.
  for (VertexId r = 0; r < n; ++r) {
    if (!g.is_right(r) || m.is_matched(r) || marked[r]) continue;
    g.g.for_neighbors(r, [&](VertexId l) {
      if (!g.is_left(l) || g.removed[l]) return;
      if (dist_l[l] == inf) dist_l[l] = 1;
    });
  }
  for (VertexId l = 0; l < n; ++l) {
    if (dist_l[l] == 1 && m.is_matched(l)) {
      dist_pair[l] = 1;
      queue.push_back(l);
    }
  }
  while (!queue.empty()) {
    VertexId l = queue.front();
    queue.pop_front();
    VertexId r = m.mate(l);
    // Any left vertex with a free edge into r can route through the pair.
    g.g.for_neighbors(r, [&](VertexId l2) {
      if (!g.is_left(l2) || g.removed[l2] || l2 == l) return;
      std::uint64_t cand = dist_pair[l] + 2;
      if (cand < dist_l[l2]) dist_l[l2] = cand;
      if (m.is_matched(l2) && cand < dist_pair[l2]) {
        dist_pair[l2] = cand;
        queue.push_back(l2);
      }
    });
  }

  LayerAudit audit;
  double gmm = g.gamma;
  audit.delta_prime = static_cast<std::uint64_t>(
      std::ceil(4.0 / gmm * std::log(std::max<double>(live_left, 2.0))));
  for (VertexId l = 0; l < n; ++l) {
    if (!g.is_left(l) || g.removed[l]) continue;
    std::uint64_t d = dist_l[l];
    if (d == inf || d > audit.delta_prime) {
      ++audit.far_count;
      audit.far_vertices.push_back(l);
    }
    if (d != inf) {
      if (audit.layer_sizes.size() <= d) audit.layer_sizes.resize(d + 1, 0);
      ++audit.layer_sizes[d];
    }
  }
  return audit;
}

std::string conductance_report_json(const ConductanceReport& rep) {
  nlohmann::json j;
  j["phi_num"] = rep.phi_num;
  j["phi_den"] = rep.phi_den;
  j["witness_cut"] = rep.witness_cut;
  return j.dump();
}

std::string walk_stats_json(const WalkHitStats& s) {
  nlohmann::json j;
  j["trials"] = s.trials;
  j["hits"] = s.hits;
  j["rate"] = s.rate;
  j["wilson_lo"] = s.wilson_lo;
  j["wilson_hi"] = s.wilson_hi;
  return j.dump();
}

}  // namespace dynamatch
