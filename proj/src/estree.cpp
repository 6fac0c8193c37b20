#include "dynamatch/estree.hpp"

#include <algorithm>
#include <cassert>

namespace dynamatch {

ResidualGraph::ResidualGraph(std::uint32_t vertex_count, VertexId sink)
    : n_(vertex_count), sink_(sink), out_(vertex_count), in_(vertex_count) {
  if (sink >= vertex_count) throw InvalidParams("sink out of range");
}

void ResidualGraph::add_arc(VertexId tail, VertexId head, std::uint32_t weight) {
  if (tail >= n_ || head >= n_) throw InvalidParams("arc endpoint out of range");
  if (tail == head) throw InvalidParams("self-loop arc");
  if (weight < 1) throw InvalidParams("arc weight must be positive");
  if (weight > 1 && head != sink_) throw InvalidParams("only sink arcs may have weight > 1");
  if (pos_.count(key(tail, head))) throw DuplicateEdge("arc already present");
  max_weight_ = std::max(max_weight_, weight);
  pos_[key(tail, head)] = {static_cast<std::uint32_t>(out_[tail].size()),
                           static_cast<std::uint32_t>(in_[head].size())};
  out_[tail].push_back({head, weight});
  in_[head].push_back(tail);
  ++arcs_;
}

void ResidualGraph::remove_arc(VertexId tail, VertexId head) {
  auto it = pos_.find(key(tail, head));
  if (it == pos_.end()) throw MissingEdge("arc not present");
  auto [oi, ii] = it->second;
  pos_.erase(it);

  // Swap-remove in both endpoint lists, fixing the moved arc's index.
  auto& ov = out_[tail];
  if (oi + 1 != ov.size()) {
    ov[oi] = ov.back();
    pos_[key(tail, ov[oi].head)].first = oi;
  }
  ov.pop_back();

  auto& iv = in_[head];
  if (ii + 1 != iv.size()) {
    iv[ii] = iv.back();
    pos_[key(iv[ii], head)].second = ii;
  }
  iv.pop_back();
  --arcs_;
}

bool ResidualGraph::has_arc(VertexId tail, VertexId head) const {
  return pos_.count(key(tail, head)) != 0;
}

std::uint32_t ResidualGraph::arc_weight(VertexId tail, VertexId head) const {
  auto it = pos_.find(key(tail, head));
  if (it == pos_.end()) throw MissingEdge("arc not present");
  return out_[tail][it->second.first].weight;
}

EsTree::EsTree(ResidualGraph g)
    : g_(std::move(g)),
      dist_(g_.vertex_count(), kUnreachable),
      parent_(g_.vertex_count(), kNoVertex),
      removed_(g_.vertex_count(), 0),
      max_dist_(g_.vertex_count(), 0),
      init_deg_(g_.vertex_count(), 0) {
  for (VertexId v = 0; v < g_.vertex_count(); ++v) {
    init_deg_[v] = static_cast<std::uint32_t>(g_.out(v).size());
  }
  build();
}

void EsTree::build() {
  // Dijkstra toward the sink over reversed arcs.
  using Entry = std::pair<Dist, VertexId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist_[g_.sink()] = 0;
  pq.push({0, g_.sink()});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d != dist_[v]) continue;
    for (VertexId u : g_.in_tails(v)) {
      ++scans_;
      Dist cand = d + g_.arc_weight(u, v);
      if (cand < dist_[u]) {
        dist_[u] = cand;
        pq.push({cand, u});
      }
    }
  }
  for (VertexId v = 0; v < g_.vertex_count(); ++v) {
    if (v != g_.sink() && dist_[v] != kUnreachable) {
      VertexId bh = kNoVertex;
      Dist b = scan_min(v, &bh);
      assert(b == dist_[v]);
      (void)b;
      parent_[v] = bh;
    }
    note_dist(v);
  }
}

Dist EsTree::scan_min(VertexId v, VertexId* best_head) {
  Dist best = kUnreachable;
  VertexId head = kNoVertex;
  for (const auto& a : g_.out(v)) {
    ++scans_;
    Dist dh = dist_[a.head];
    if (dh == kUnreachable) continue;
    Dist cand = dh + a.weight;
    if (cand < best || (cand == best && a.head < head)) {
      best = cand;
      head = a.head;
    }
  }
  if (best > kUnreachable) best = kUnreachable;
  *best_head = best == kUnreachable ? kNoVertex : head;
  return best;
}

void EsTree::schedule(VertexId v) { heap_.push({dist_[v], v}); }

void EsTree::settle() {
  while (!heap_.empty()) {
    auto [key, v] = heap_.top();
    heap_.pop();
    if (removed_[v] || v == g_.sink()) continue;
    if (key < dist_[v]) continue;  // stale: label already advanced past this entry
    VertexId bh = kNoVertex;
    Dist b = scan_min(v, &bh);
    if (b != kUnreachable && b >= cap()) {
      // Ratcheting inside a disconnected cycle; no simple path is this long.
      b = kUnreachable;
      bh = kNoVertex;
    }
    if (b == dist_[v]) {
      parent_[v] = bh;
      continue;
    }
    assert(b > dist_[v]);
    if (b > key) {
      // Not safe to commit yet; requeue at its recomputed value.
      heap_.push({b, v});
      continue;
    }
    dist_[v] = b;
    parent_[v] = bh;
    ++label_changes_;
    note_dist(v);
    for (VertexId w : g_.in_tails(v)) {
      if (!removed_[w] && parent_[w] == v) schedule(w);
    }
  }
}

void EsTree::delete_arc(VertexId u, VertexId v) {
  g_.remove_arc(u, v);
  ++updates_;
  if (!removed_[u] && parent_[u] == v) schedule(u);
  settle();
}

void EsTree::insert_arc(VertexId u, VertexId v, std::uint32_t w) {
  if (removed_[u] || removed_[v]) throw InvalidParams("arc endpoint was removed");
  Dist through = dist_[v] == kUnreachable ? kUnreachable : dist_[v] + w;
  if (through < dist_[u]) {
    throw MonotonicityViolation("insertion would decrease a distance to the sink");
  }
  g_.add_arc(u, v, w);
  ++updates_;
  if (through == dist_[u] && (parent_[u] == kNoVertex || v < parent_[u])) {
    parent_[u] = v;
  }
}

void EsTree::remove_vertex(VertexId v) {
  if (v == g_.sink()) throw SinkRemoval("cannot remove the sink");
  if (removed_[v]) return;
  removed_[v] = 1;
  ++updates_;
  std::vector<VertexId> heads;
  heads.reserve(g_.out(v).size());
  for (const auto& a : g_.out(v)) heads.push_back(a.head);
  for (VertexId h : heads) g_.remove_arc(v, h);
  std::vector<VertexId> tails(g_.in_tails(v).begin(), g_.in_tails(v).end());
  for (VertexId t : tails) {
    g_.remove_arc(t, v);
    if (!removed_[t] && parent_[t] == v) schedule(t);
  }
  parent_[v] = kNoVertex;
  settle();
}

std::vector<VertexId> EsTree::path_to_sink(VertexId v) const {
  if (removed_[v] || dist_[v] == kUnreachable) throw Unreachable("no path to sink");
  std::vector<VertexId> path;
  VertexId cur = v;
  Dist walked = 0;
  while (cur != g_.sink()) {
    path.push_back(cur);
    VertexId p = parent_[cur];
    if (p == kNoVertex || path.size() > g_.vertex_count()) {
      throw Unreachable("broken parent chain");
    }
    walked += g_.arc_weight(cur, p);
    cur = p;
  }
  path.push_back(g_.sink());
  if (walked != dist_[v]) throw Unreachable("tree path weight disagrees with label");
  return path;
}

}  // namespace dynamatch
