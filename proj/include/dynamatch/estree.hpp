#pragma once

#include <cstdint>
#include <queue>
#include <unordered_map>
#include <vector>

#include "dynamatch/core.hpp"

namespace dynamatch {

using Dist = std::uint64_t;
/// Sentinel strictly above any achievable distance.
inline constexpr Dist kUnreachable = static_cast<Dist>(1) << 62;

/// Directed graph with positive integer weights; only arcs whose head is the
/// sink may carry weight > 1. Arc removal is O(1) amortized via a position
/// index, so deleting a sink arc does not scan the sink's whole in-list.
class ResidualGraph {
 public:
  struct Arc {
    VertexId head;
    std::uint32_t weight;
  };

  ResidualGraph(std::uint32_t vertex_count, VertexId sink);

  VertexId sink() const { return sink_; }
  std::uint32_t vertex_count() const { return n_; }
  std::uint64_t arc_count() const { return arcs_; }

  void add_arc(VertexId tail, VertexId head, std::uint32_t weight);
  void remove_arc(VertexId tail, VertexId head);
  bool has_arc(VertexId tail, VertexId head) const;
  std::uint32_t arc_weight(VertexId tail, VertexId head) const;
  std::uint32_t max_weight_seen() const { return max_weight_; }

  const std::vector<Arc>& out(VertexId v) const { return out_[v]; }
  const std::vector<VertexId>& in_tails(VertexId v) const { return in_[v]; }

 private:
  std::uint64_t key(VertexId tail, VertexId head) const {
    return (static_cast<std::uint64_t>(tail) << 32) | head;
  }

  std::uint32_t n_;
  VertexId sink_;
  std::uint64_t arcs_ = 0;
  std::uint32_t max_weight_ = 1;
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<VertexId>> in_;
  std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> pos_;
};

/// Monotone Even-Shiloach shortest-path tree to the sink of a ResidualGraph.
/// Supports arc deletions, distance-preserving arc insertions, and vertex
/// removal. Labels never decrease; when a label must rise the vertex rescans
/// its out-arcs from scratch, and settling proceeds in increasing label
/// order through a lazy heap.
class EsTree {
 public:
  explicit EsTree(ResidualGraph g);

  Dist dist(VertexId v) const { return dist_[v]; }
  VertexId parent(VertexId v) const { return parent_[v]; }
  bool removed(VertexId v) const { return removed_[v] != 0; }
  const ResidualGraph& graph() const { return g_; }

  void delete_arc(VertexId u, VertexId v);
  /// Requires w + dist(v) >= dist(u); otherwise the insertion would lower a
  /// distance, which this structure cannot absorb.
  void insert_arc(VertexId u, VertexId v, std::uint32_t w);
  /// Batch-deletes every arc at v and freezes its label. v must not be the sink.
  void remove_vertex(VertexId v);
  /// Tree path v .. sink. Throws Unreachable when dist(v) is the sentinel.
  std::vector<VertexId> path_to_sink(VertexId v) const;

  std::uint64_t scans() const { return scans_; }
  std::uint64_t label_changes() const { return label_changes_; }
  std::uint64_t structural_updates() const { return updates_; }
  Dist max_dist_seen(VertexId v) const { return max_dist_[v]; }
  std::uint32_t initial_out_degree(VertexId v) const { return init_deg_[v]; }

 private:
  void build();
  Dist scan_min(VertexId v, VertexId* best_head);
  void schedule(VertexId v);
  void settle();
  void note_dist(VertexId v) {
    if (dist_[v] != kUnreachable && dist_[v] > max_dist_[v]) max_dist_[v] = dist_[v];
  }
  /// Any simple path is shorter than this, so labels ratcheting past it in a
  /// disconnected cycle jump straight to the sentinel.
  Dist cap() const {
    return static_cast<Dist>(g_.vertex_count()) * std::max<std::uint32_t>(g_.max_weight_seen(), 1) +
           1;
  }

  ResidualGraph g_;
  std::vector<Dist> dist_;
  std::vector<VertexId> parent_;
  std::vector<char> removed_;
  std::vector<Dist> max_dist_;
  std::vector<std::uint32_t> init_deg_;
  using HeapEntry = std::pair<Dist, VertexId>;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap_;

  std::uint64_t scans_ = 0;
  std::uint64_t label_changes_ = 0;
  std::uint64_t updates_ = 0;
};

}  // namespace dynamatch
