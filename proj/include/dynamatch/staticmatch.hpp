#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "dynamatch/core.hpp"

namespace dynamatch {

/// Proper edge coloring; every color class is a matching.
struct EdgeColoring {
  std::uint32_t num_colors = 0;
  std::vector<std::tuple<VertexId, VertexId, std::uint32_t>> edges;  // (u, v, color), u < v

  std::vector<std::vector<std::pair<VertexId, VertexId>>> classes() const;
};

/// Colors g with at most maxdeg(g)+1 colors by sequential fan/path recoloring.
EdgeColoring edge_color(const DynGraph& g);

enum class MatchMostMode : std::uint8_t { Deterministic, Randomized };

struct MatchMostParams {
  double delta_cap;  // degree cap of the instance; must be >= max degree
  double kappa;      // slack; the returned matching leaves <= 2*kappa*n of the near-cap vertices free
  MatchMostMode mode = MatchMostMode::Deterministic;
  std::uint64_t seed = 1;
  std::uint32_t sample_rounds = 0;  // randomized mode; 0 = ceil(log2 n) + 1
};

/// Vertices with degree >= (1-kappa)*delta_cap.
std::vector<VertexId> near_cap_vertices(const DynGraph& g, double delta_cap, double kappa);

/// Returns a matching of g leaving at most 2*kappa*n near-cap vertices
/// unmatched. Deterministic mode colors g and keeps the best color class;
/// randomized mode pads near-cap vertices to full degree with dummy vertices,
/// colors the padded graph, samples random classes, and restricts the best
/// one back to real edges.
Matching match_most(const DynGraph& g, const MatchMostParams& params);

}  // namespace dynamatch
