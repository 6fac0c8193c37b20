#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dynamatch/errors.hpp"

namespace dynamatch {

using VertexId = std::uint32_t;
inline constexpr VertexId kNoVertex = 0xffffffffu;

enum class UpdateKind : std::uint8_t { Insert, Delete };

struct UpdateEvent {
  UpdateKind kind;
  VertexId u;
  VertexId v;

  static UpdateEvent insert(VertexId u, VertexId v) { return {UpdateKind::Insert, u, v}; }
  static UpdateEvent erase(VertexId u, VertexId v) { return {UpdateKind::Delete, u, v}; }
  bool operator==(const UpdateEvent&) const = default;
};

/// Shared node arena for order-statistic sets. Every adjacency set of a
/// DynGraph lives in one pool; a set is addressed by its root index. The
/// tree is a treap keyed by vertex id whose priorities are a fixed hash of
/// the key, so the structure (and all iteration orders) are deterministic.
/// kth/rank/contains run in expected O(log size).
class OrderStatPool {
 public:
  static constexpr std::uint32_t kNil = 0xffffffffu;

  bool insert(std::uint32_t& root, VertexId key);
  bool erase(std::uint32_t& root, VertexId key);
  bool contains(std::uint32_t root, VertexId key) const;
  std::uint32_t size(std::uint32_t root) const { return root == kNil ? 0 : nodes_[root].size; }
  /// k-th smallest key, 0-based. Caller must ensure k < size(root).
  VertexId kth(std::uint32_t root, std::uint32_t k) const;
  /// Number of keys strictly smaller than `key`.
  std::uint32_t rank(std::uint32_t root, VertexId key) const;
  void clear(std::uint32_t& root);

  template <typename F>
  void for_each(std::uint32_t root, F&& f) const {
    if (root == kNil) return;
    for_each(nodes_[root].left, f);
    f(nodes_[root].key);
    for_each(nodes_[root].right, f);
  }

  /// In-order visit that stops when f returns false.
  template <typename F>
  bool for_each_while(std::uint32_t root, F&& f) const {
    if (root == kNil) return true;
    if (!for_each_while(nodes_[root].left, f)) return false;
    if (!f(nodes_[root].key)) return false;
    return for_each_while(nodes_[root].right, f);
  }

 private:
  struct Node {
    VertexId key;
    std::uint32_t left;
    std::uint32_t right;
    std::uint32_t size;
  };

  static std::uint32_t prio(VertexId key) {
    std::uint32_t x = key + 0x9e3779b9u;
    x ^= x >> 16;
    x *= 0x85ebca6bu;
    x ^= x >> 13;
    x *= 0xc2b2ae35u;
    x ^= x >> 16;
    return x;
  }
  // Priority order with key tiebreak so distinct keys never compare equal.
  static bool prio_less(VertexId a, VertexId b) {
    std::uint32_t pa = prio(a), pb = prio(b);
    return pa != pb ? pa < pb : a < b;
  }

  std::uint32_t make(VertexId key);
  void release(std::uint32_t idx);
  void pull(std::uint32_t x);
  void split(std::uint32_t t, VertexId key, std::uint32_t& l, std::uint32_t& r);
  std::uint32_t merge(std::uint32_t l, std::uint32_t r);
  std::uint32_t insert_node(std::uint32_t t, std::uint32_t x);
  std::uint32_t erase_key(std::uint32_t t, VertexId key, bool& erased);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_;
};

/// Mutable undirected simple graph over a fixed dense vertex set [0, n).
/// Adjacency is kept as ordered balanced sets so neighbors can be selected
/// by rank in O(log deg); this is what the randomized matching walk needs.
class DynGraph {
 public:
  explicit DynGraph(std::uint32_t n);

  std::uint32_t vertex_count() const { return n_; }
  std::uint64_t edge_count() const { return m_; }
  std::uint32_t degree(VertexId v) const;
  bool has_edge(VertexId u, VertexId v) const;

  void insert_edge(VertexId u, VertexId v);
  void remove_edge(VertexId u, VertexId v);
  void apply(const UpdateEvent& e);

  /// k-th neighbor of v in ascending id order, 0-based.
  VertexId kth_neighbor(VertexId v, std::uint32_t k) const;
  /// Rank of w within v's adjacency (number of neighbors with id < w).
  std::uint32_t neighbor_rank(VertexId v, VertexId w) const;

  template <typename F>
  void for_neighbors(VertexId v, F&& f) const {
    pool_.for_each(roots_[v], f);
  }
  /// Ascending visit that stops when f returns false.
  template <typename F>
  void for_neighbors_while(VertexId v, F&& f) const {
    pool_.for_each_while(roots_[v], f);
  }
  std::vector<VertexId> neighbors(VertexId v) const;

  /// Remove every edge incident on v. Used to realize vertex tombstones.
  void isolate(VertexId v);

  /// Sorted (u < v) list of all edges. O(m log m) worst case; for audits.
  std::vector<std::pair<VertexId, VertexId>> edges() const;

 private:
  void check_vertex(VertexId v) const;

  std::uint32_t n_;
  std::uint64_t m_ = 0;
  OrderStatPool pool_;
  std::vector<std::uint32_t> roots_;
};

/// Symmetric mate map with a size counter. Knows nothing about any host
/// graph; callers are responsible for only declaring pairs that are edges.
class Matching {
 public:
  Matching() = default;
  explicit Matching(std::uint32_t n) : mate_(n, kNoVertex) {}

  std::uint32_t vertex_count() const { return static_cast<std::uint32_t>(mate_.size()); }
  std::uint32_t size() const { return size_; }
  bool is_matched(VertexId v) const { return mate_[v] != kNoVertex; }
  VertexId mate(VertexId v) const { return mate_[v]; }
  bool has_pair(VertexId u, VertexId v) const { return u != v && mate_[u] == v; }

  void match(VertexId u, VertexId v);
  void unmatch(VertexId u, VertexId v);
  /// Removes (u,v) if it is a matched pair; returns whether it was.
  bool unmatch_if_pair(VertexId u, VertexId v);

  std::vector<std::pair<VertexId, VertexId>> edges() const;  // sorted, u < v
  void clear();

 private:
  std::vector<VertexId> mate_;
  std::uint32_t size_ = 0;
};

/// Applies the augmenting path `path` (a vertex sequence whose first edge is
/// unmatched and which alternates from there, ending at a free vertex) to m:
/// M <- M xor P. Throws NotAlternating when the sequence does not alternate
/// or an endpoint is already matched.
void augment_along(Matching& m, std::span<const VertexId> path);

}  // namespace dynamatch
