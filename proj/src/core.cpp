#include "dynamatch/core.hpp"

#include <algorithm>
#include <unordered_set>

namespace dynamatch {

std::uint32_t OrderStatPool::make(VertexId key) {
  std::uint32_t idx;
  if (!free_.empty()) {
    idx = free_.back();
    free_.pop_back();
  } else {
    idx = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
  }
  nodes_[idx] = {key, kNil, kNil, 1};
  return idx;
}

void OrderStatPool::release(std::uint32_t idx) { free_.push_back(idx); }

void OrderStatPool::pull(std::uint32_t x) {
  Node& n = nodes_[x];
  n.size = 1 + size(n.left) + size(n.right);
}

void OrderStatPool::split(std::uint32_t t, VertexId key, std::uint32_t& l, std::uint32_t& r) {
  if (t == kNil) {
    l = r = kNil;
    return;
  }
  if (nodes_[t].key < key) {
    split(nodes_[t].right, key, nodes_[t].right, r);
    l = t;
  } else {
    split(nodes_[t].left, key, l, nodes_[t].left);
    r = t;
  }
  pull(t);
}

std::uint32_t OrderStatPool::merge(std::uint32_t l, std::uint32_t r) {
  if (l == kNil) return r;
  if (r == kNil) return l;
  if (prio_less(nodes_[r].key, nodes_[l].key)) {
    nodes_[l].right = merge(nodes_[l].right, r);
    pull(l);
    return l;
  }
  nodes_[r].left = merge(l, nodes_[r].left);
  pull(r);
  return r;
}

std::uint32_t OrderStatPool::insert_node(std::uint32_t t, std::uint32_t x) {
  if (t == kNil) return x;
  if (prio_less(nodes_[t].key, nodes_[x].key)) {
    split(t, nodes_[x].key, nodes_[x].left, nodes_[x].right);
    pull(x);
    return x;
  }
  if (nodes_[x].key < nodes_[t].key) {
    nodes_[t].left = insert_node(nodes_[t].left, x);
  } else {
    nodes_[t].right = insert_node(nodes_[t].right, x);
  }
  pull(t);
  return t;
}

std::uint32_t OrderStatPool::erase_key(std::uint32_t t, VertexId key, bool& erased) {
  if (t == kNil) return kNil;
  if (nodes_[t].key == key) {
    erased = true;
    std::uint32_t res = merge(nodes_[t].left, nodes_[t].right);
    release(t);
    return res;
  }
  if (key < nodes_[t].key) {
    nodes_[t].left = erase_key(nodes_[t].left, key, erased);
  } else {
    nodes_[t].right = erase_key(nodes_[t].right, key, erased);
  }
  pull(t);
  return t;
}

bool OrderStatPool::insert(std::uint32_t& root, VertexId key) {
  if (contains(root, key)) return false;
  root = insert_node(root, make(key));
  return true;
}

bool OrderStatPool::erase(std::uint32_t& root, VertexId key) {
  bool erased = false;
  root = erase_key(root, key, erased);
  return erased;
}

bool OrderStatPool::contains(std::uint32_t root, VertexId key) const {
  std::uint32_t t = root;
  while (t != kNil) {
    if (nodes_[t].key == key) return true;
    t = key < nodes_[t].key ? nodes_[t].left : nodes_[t].right;
  }
  return false;
}

VertexId OrderStatPool::kth(std::uint32_t root, std::uint32_t k) const {
  std::uint32_t t = root;
  while (t != kNil) {
    std::uint32_t ls = size(nodes_[t].left);
    if (k < ls) {
      t = nodes_[t].left;
    } else if (k == ls) {
      return nodes_[t].key;
    } else {
      k -= ls + 1;
      t = nodes_[t].right;
    }
  }
  throw RankOutOfBounds("order-statistic rank out of bounds");
}

std::uint32_t OrderStatPool::rank(std::uint32_t root, VertexId key) const {
  std::uint32_t t = root, r = 0;
  while (t != kNil) {
    if (key <= nodes_[t].key) {
      t = nodes_[t].left;
    } else {
      r += size(nodes_[t].left) + 1;
      t = nodes_[t].right;
    }
  }
  return r;
}

void OrderStatPool::clear(std::uint32_t& root) {
  // Recycles the whole subtree.
  if (root == kNil) return;
  std::vector<std::uint32_t> stack{root};
  while (!stack.empty()) {
    std::uint32_t t = stack.back();
    stack.pop_back();
    if (nodes_[t].left != kNil) stack.push_back(nodes_[t].left);
    if (nodes_[t].right != kNil) stack.push_back(nodes_[t].right);
    release(t);
  }
  root = kNil;
}

DynGraph::DynGraph(std::uint32_t n) : n_(n), roots_(n, OrderStatPool::kNil) {}

void DynGraph::check_vertex(VertexId v) const {
  if (v >= n_) throw InvalidParams("vertex id out of range");
}

std::uint32_t DynGraph::degree(VertexId v) const {
  check_vertex(v);
  return pool_.size(roots_[v]);
}

bool DynGraph::has_edge(VertexId u, VertexId v) const {
  check_vertex(u);
  check_vertex(v);
  return pool_.contains(roots_[u], v);
}

void DynGraph::insert_edge(VertexId u, VertexId v) {
  check_vertex(u);
  check_vertex(v);
  if (u == v) throw InvalidParams("self-loops are not allowed");
  if (pool_.contains(roots_[u], v)) throw DuplicateEdge("edge already present");
  pool_.insert(roots_[u], v);
  pool_.insert(roots_[v], u);
  ++m_;
}

void DynGraph::remove_edge(VertexId u, VertexId v) {
  check_vertex(u);
  check_vertex(v);
  if (!pool_.erase(roots_[u], v)) throw MissingEdge("edge not present");
  pool_.erase(roots_[v], u);
  --m_;
}

void DynGraph::apply(const UpdateEvent& e) {
  if (e.u == e.v) throw InvalidParams("self-loop event");
  if (e.kind == UpdateKind::Insert) {
    insert_edge(e.u, e.v);
  } else {
    remove_edge(e.u, e.v);
  }
}

VertexId DynGraph::kth_neighbor(VertexId v, std::uint32_t k) const {
  check_vertex(v);
  if (k >= pool_.size(roots_[v])) throw RankOutOfBounds("neighbor rank out of bounds");
  return pool_.kth(roots_[v], k);
}

std::uint32_t DynGraph::neighbor_rank(VertexId v, VertexId w) const {
  check_vertex(v);
  return pool_.rank(roots_[v], w);
}

std::vector<VertexId> DynGraph::neighbors(VertexId v) const {
  check_vertex(v);
  std::vector<VertexId> out;
  out.reserve(pool_.size(roots_[v]));
  pool_.for_each(roots_[v], [&](VertexId w) { out.push_back(w); });
  return out;
}

void DynGraph::isolate(VertexId v) {
  check_vertex(v);
  std::vector<VertexId> nbrs = neighbors(v);
  for (VertexId w : nbrs) {
    pool_.erase(roots_[w], v);
  }
  m_ -= nbrs.size();
  pool_.clear(roots_[v]);
}

std::vector<std::pair<VertexId, VertexId>> DynGraph::edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(m_);
  for (VertexId u = 0; u < n_; ++u) {
    pool_.for_each(roots_[u], [&](VertexId w) {
      if (u < w) out.emplace_back(u, w);
    });
  }
  return out;
}

void Matching::match(VertexId u, VertexId v) {
  if (u == v) throw InvalidMatching("cannot match a vertex to itself");
  if (mate_[u] != kNoVertex || mate_[v] != kNoVertex) {
    throw InvalidMatching("endpoint already matched");
  }
  mate_[u] = v;
  mate_[v] = u;
  ++size_;
}

void Matching::unmatch(VertexId u, VertexId v) {
  if (mate_[u] != v || mate_[v] != u) throw InvalidMatching("pair is not matched");
  mate_[u] = kNoVertex;
  mate_[v] = kNoVertex;
  --size_;
}

bool Matching::unmatch_if_pair(VertexId u, VertexId v) {
  if (u == v || mate_[u] != v) return false;
  unmatch(u, v);
  return true;
}

std::vector<std::pair<VertexId, VertexId>> Matching::edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(size_);
  for (VertexId u = 0; u < mate_.size(); ++u) {
    if (mate_[u] != kNoVertex && u < mate_[u]) out.emplace_back(u, mate_[u]);
  }
  return out;
}

void Matching::clear() {
  std::fill(mate_.begin(), mate_.end(), kNoVertex);
  size_ = 0;
}

void augment_along(Matching& m, std::span<const VertexId> path) {
  if (path.size() < 2 || path.size() % 2 != 0) {
    throw NotAlternating("augmenting path must have an odd number of edges");
  }
  if (m.is_matched(path.front()) || m.is_matched(path.back())) {
    throw NotAlternating("augmenting path endpoints must be free");
  }
  std::unordered_set<VertexId> seen(path.begin(), path.end());
  if (seen.size() != path.size()) throw NotAlternating("augmenting path revisits a vertex");
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    bool should_be_matched = (i % 2 == 1);
    bool is_matched = m.has_pair(path[i], path[i + 1]);
    if (is_matched != should_be_matched) {
      throw NotAlternating("path does not alternate against the matching");
    }
  }
  for (std::size_t i = 1; i + 1 < path.size(); i += 2) {
    m.unmatch(path[i], path[i + 1]);
  }
  for (std::size_t i = 0; i + 1 < path.size(); i += 2) {
    m.match(path[i], path[i + 1]);
  }
}

}  // namespace dynamatch
