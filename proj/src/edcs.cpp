#include "dynamatch/edcs.hpp"

#include <cmath>

namespace dynamatch {

EdcsState::EdcsState(const DynGraph& host, std::uint32_t cap_b, double eps)
    : host_(&host),
      h_(host.vertex_count()),
      cap_b_(cap_b),
      eps_(eps),
      bucket_head_(cap_b + 2, kNoVertex),
      bucket_count_(cap_b + 2, 0),
      bkt_prev_(host.vertex_count(), kNoVertex),
      bkt_next_(host.vertex_count(), kNoVertex) {
  if (cap_b_ < 1 || cap_b_ > host.vertex_count()) throw InvalidParams("EDCS bound B must be in [1, n]");
  if (!(eps_ > 0.0 && eps_ < 1.0)) throw InvalidParams("EDCS eps must lie in (0,1)");
  double lower_real = (1.0 - eps_) * static_cast<double>(cap_b_);
  if (lower_real < 1.0) throw InvalidParams("EDCS requires (1-eps)B >= 1");
  auto lower = static_cast<std::uint32_t>(std::ceil(lower_real - 1e-6));
  lower_int_ = std::min(lower, cap_b_ - 1);

  for (VertexId v = 0; v < host.vertex_count(); ++v) bucket_insert(v, 0);

  std::vector<EdcsChange> sink;
  for (auto [u, v] : host.edges()) dirty_.emplace_back(u, v);
  repair(sink);
}

void EdcsState::bucket_insert(VertexId v, std::uint32_t d) {
  bkt_prev_[v] = kNoVertex;
  bkt_next_[v] = bucket_head_[d];
  if (bucket_head_[d] != kNoVertex) bkt_prev_[bucket_head_[d]] = v;
  bucket_head_[d] = v;
  ++bucket_count_[d];
}

void EdcsState::bucket_erase(VertexId v, std::uint32_t d) {
  if (bkt_prev_[v] != kNoVertex) {
    bkt_next_[bkt_prev_[v]] = bkt_next_[v];
  } else {
    bucket_head_[d] = bkt_next_[v];
  }
  if (bkt_next_[v] != kNoVertex) bkt_prev_[bkt_next_[v]] = bkt_prev_[v];
  --bucket_count_[d];
}

void EdcsState::bucket_move(VertexId v, std::uint32_t from, std::uint32_t to) {
  bucket_erase(v, from);
  bucket_insert(v, to);
}

void EdcsState::add_edge_to_h(VertexId u, VertexId v, std::vector<EdcsChange>& out) {
  std::uint32_t du = h_.degree(u), dv = h_.degree(v);
  h_.insert_edge(u, v);
  bucket_move(u, du, du + 1);
  bucket_move(v, dv, dv + 1);
  ++flips_;
  out.push_back({true, u, v});
}

void EdcsState::drop_edge_from_h(VertexId u, VertexId v, std::vector<EdcsChange>& out) {
  std::uint32_t du = h_.degree(u), dv = h_.degree(v);
  h_.remove_edge(u, v);
  bucket_move(u, du, du - 1);
  bucket_move(v, dv, dv - 1);
  ++flips_;
  out.push_back({false, u, v});
}

// After deg_H(v) dropped, host edges (v,w) outside H whose degree fell below
// the lower bound must be re-examined. A violating w needs deg_H(w) <= tau;
// walk whichever is cheaper, the low-degree buckets or v's host adjacency.
void EdcsState::scan_after_drop(VertexId v) {
  std::uint32_t dv = h_.degree(v);
  if (dv >= lower_int_) return;             // no partner degree can violate
  std::uint32_t tau = lower_int_ - 1 - dv;  // max partner degree that violates
  std::uint64_t bucket_vol = 0;
  for (std::uint32_t d = 0; d <= tau && d <= cap_b_; ++d) bucket_vol += bucket_count_[d];

  if (bucket_vol <= host_->degree(v)) {
    for (std::uint32_t d = 0; d <= tau && d <= cap_b_; ++d) {
      for (VertexId w = bucket_head_[d]; w != kNoVertex; w = bkt_next_[w]) {
        ++scans_;
        if (w == v) continue;
        if (host_->has_edge(v, w) && !h_.has_edge(v, w)) dirty_.emplace_back(v, w);
      }
    }
  } else {
    host_->for_neighbors(v, [&](VertexId w) {
      ++scans_;
      if (h_.degree(w) <= tau && !h_.has_edge(v, w)) dirty_.emplace_back(v, w);
    });
  }
}

// After deg_H(v) rose, H edges at v may exceed the cap.
void EdcsState::scan_after_add(VertexId v) {
  std::uint32_t dv = h_.degree(v);
  h_.for_neighbors(v, [&](VertexId w) {
    ++scans_;
    if (dv + h_.degree(w) > cap_b_) dirty_.emplace_back(v, w);
  });
}

void EdcsState::repair(std::vector<EdcsChange>& out) {
  while (!dirty_.empty()) {
    auto [u, v] = dirty_.front();
    dirty_.pop_front();
    ++scans_;
    if (!host_->has_edge(u, v)) continue;  // stale entry
    bool in_h = h_.has_edge(u, v);
    std::uint32_t d = edge_degree(u, v);
    if (in_h && d > cap_b_) {
      drop_edge_from_h(u, v, out);
      scan_after_drop(u);
      scan_after_drop(v);
    } else if (!in_h && d < lower_int_) {
      add_edge_to_h(u, v, out);
      scan_after_add(u);
      scan_after_add(v);
    }
  }
}

std::vector<EdcsChange> EdcsState::on_update(const UpdateEvent& e) {
  std::vector<EdcsChange> out;
  if (e.kind == UpdateKind::Insert) {
    dirty_.emplace_back(e.u, e.v);
  } else {
    if (h_.has_edge(e.u, e.v)) {
      drop_edge_from_h(e.u, e.v, out);
      scan_after_drop(e.u);
      scan_after_drop(e.v);
    }
  }
  repair(out);
  return out;
}

EdcsReport EdcsState::validate() const {
  EdcsReport rep;
  double lower_real = (1.0 - eps_) * static_cast<double>(cap_b_);
  for (VertexId u = 0; u < h_.vertex_count(); ++u) {
    h_.for_neighbors(u, [&](VertexId v) {
      if (u >= v) return;
      std::uint32_t d = edge_degree(u, v);
      if (!host_->has_edge(u, v)) rep.violations.push_back({u, v, 3, d});
      if (d > cap_b_) rep.violations.push_back({u, v, 1, d});
    });
  }
  for (VertexId u = 0; u < host_->vertex_count(); ++u) {
    host_->for_neighbors(u, [&](VertexId v) {
      if (u >= v || h_.has_edge(u, v)) return;
      std::uint32_t d = edge_degree(u, v);
      if (static_cast<double>(d) + 1e-9 < lower_real) rep.violations.push_back({u, v, 2, d});
    });
  }
  return rep;
}

}  // namespace dynamatch
