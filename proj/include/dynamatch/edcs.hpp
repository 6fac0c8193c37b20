#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "dynamatch/core.hpp"

namespace dynamatch {

struct EdcsChange {
  bool inserted;  // true = edge added to H, false = removed from H
  VertexId u;
  VertexId v;
};

struct EdcsViolation {
  VertexId u;
  VertexId v;
  int condition;  // 1 = edge degree above B, 2 = missing-edge degree below (1-eps)B, 3 = containment
  std::uint32_t edge_degree;
};

struct EdcsReport {
  std::vector<EdcsViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Maintains a (B, (1-eps)B)-EDCS H of a host graph by local repair: a FIFO
/// queue of suspect edges is drained, removing over-full H edges and adding
/// starved non-H edges until both conditions hold. Candidate discovery after
/// a degree drop uses global H-degree buckets so it never scans more than
/// min(deg_G, low-degree-bucket volume) vertices.
///
/// Repair termination needs the integer add-threshold to stay <= B-1, so the
/// maintained lower bound is min(ceil((1-eps)B), B-1); when eps*B >= 1 the
/// two coincide and the maintained subgraph meets the definition exactly.
class EdcsState {
 public:
  EdcsState(const DynGraph& host, std::uint32_t cap_b, double eps);

  const DynGraph& subgraph() const { return h_; }
  const DynGraph& host() const { return *host_; }
  std::uint32_t cap() const { return cap_b_; }
  double eps() const { return eps_; }
  std::uint32_t lower_threshold() const { return lower_int_; }

  /// The host graph must already reflect `e`. Returns the H edge changes.
  std::vector<EdcsChange> on_update(const UpdateEvent& e);

  /// Exhaustive check of both EDCS conditions against the exact real-valued
  /// thresholds (B and (1-eps)B), plus subgraph containment.
  EdcsReport validate() const;

  std::uint64_t flips() const { return flips_; }
  std::uint64_t scans() const { return scans_; }

 private:
  std::uint32_t edge_degree(VertexId u, VertexId v) const { return h_.degree(u) + h_.degree(v); }
  void bucket_insert(VertexId v, std::uint32_t d);
  void bucket_erase(VertexId v, std::uint32_t d);
  void bucket_move(VertexId v, std::uint32_t from, std::uint32_t to);
  void add_edge_to_h(VertexId u, VertexId v, std::vector<EdcsChange>& out);
  void drop_edge_from_h(VertexId u, VertexId v, std::vector<EdcsChange>& out);
  void scan_after_drop(VertexId v);
  void scan_after_add(VertexId v);
  void repair(std::vector<EdcsChange>& out);

  const DynGraph* host_;
  DynGraph h_;
  std::uint32_t cap_b_;
  double eps_;
  std::uint32_t lower_int_;

  std::deque<std::pair<VertexId, VertexId>> dirty_;

  // Intrusive doubly-linked degree buckets over H degrees (0..cap_b_).
  std::vector<VertexId> bucket_head_;
  std::vector<std::uint32_t> bucket_count_;
  std::vector<VertexId> bkt_prev_, bkt_next_;

  std::uint64_t flips_ = 0;
  std::uint64_t scans_ = 0;
};

}  // namespace dynamatch
