#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynamatch/core.hpp"
#include "dynamatch/lpm.hpp"

namespace dynamatch {

/// Directed multigraph obtained by contracting every matched pair into one
/// vertex and every free vertex into the sink. Parallel edges keep their
/// multiplicity; self-loops are dropped.
struct ContractedGraph {
  struct MultiArc {
    std::uint32_t head;
    std::uint64_t multiplicity;
  };

  std::uint32_t vertex_count = 0;  // contracted pairs + 1 (sink is the last id)
  std::uint32_t sink = 0;
  std::vector<std::vector<MultiArc>> out;
  std::vector<std::pair<VertexId, VertexId>> pair_of;  // (left, right) per non-sink vertex

  std::uint64_t out_degree(std::uint32_t v) const;
  std::uint64_t in_degree(std::uint32_t v) const;
  std::uint64_t volume() const;
  void add_arc(std::uint32_t tail, std::uint32_t head, std::uint64_t mult = 1);
};

ContractedGraph contract(const DegreeGapGraph& g, const Matching& m);

/// Adds parallel sink->v arcs until every non-sink vertex has in = out.
ContractedGraph eulerianize(const ContractedGraph& gm);

struct ConductanceReport {
  std::uint64_t phi_num = 0;
  std::uint64_t phi_den = 1;
  std::vector<std::uint32_t> witness_cut;
  double value() const { return phi_den == 0 ? 0.0 : static_cast<double>(phi_num) / phi_den; }
};

/// Exact conductance by enumerating every cut. Throws TooLarge above 20 vertices.
ConductanceReport conductance_bruteforce(const ContractedGraph& g);

struct WalkHitStats {
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double rate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 1.0;
};

/// Monte-Carlo estimate of Pr[a k-step random walk from v reaches the sink],
/// walking arcs proportionally to multiplicity, with a Wilson interval.
WalkHitStats walk_hit_stats(const ContractedGraph& gm, std::uint32_t v, std::uint64_t k,
                            std::uint64_t trials, std::uint64_t seed);

struct LayerAudit {
  std::vector<std::uint64_t> layer_sizes;  // layer_sizes[i] = |L_i| (path length i)
  std::uint64_t far_count = 0;             // |L_{> delta_prime}|
  std::uint64_t delta_prime = 0;
  std::vector<VertexId> far_vertices;
};

/// Shortest alternating-path layers of the left side: the distance of u is
/// the length of the shortest alternating path starting at u with an
/// unmatched edge and ending at an unmarked free right vertex. Requires m to
/// be left-perfect on the live left side.
LayerAudit alternating_layer_audit(const DegreeGapGraph& g, const Matching& m,
                                   const std::vector<VertexId>& r_mark);

std::string conductance_report_json(const ConductanceReport& rep);
std::string walk_stats_json(const WalkHitStats& s);

}  // namespace dynamatch
