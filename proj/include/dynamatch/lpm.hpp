#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynamatch/core.hpp"
#include "dynamatch/estree.hpp"

namespace dynamatch {

enum class LpmBackend : std::uint8_t { Deterministic, Randomized };

/// Bipartite graph expected to satisfy a gamma-degree-gap at X: every live
/// left vertex has degree >= X and every right vertex degree <= (1-gamma)X.
/// Left vertices whose degree drops below X get tombstoned by the LPM and
/// are removed (adjacency emptied, never renumbered).
struct DegreeGapGraph {
  enum class Side : std::uint8_t { None, Left, Right };

  DegreeGapGraph(std::uint32_t n, std::uint32_t x, double gamma_gap)
      : g(n), side(n, Side::None), removed(n, 0), x(x), gamma(gamma_gap) {
    if (x < 1) throw InvalidParams("degree-gap threshold X must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParams("gamma must lie in (0,1)");
  }

  void set_side(VertexId v, Side s) { side[v] = s; }
  void add_edge(VertexId l, VertexId r) {
    if (side[l] != Side::Left || side[r] != Side::Right) {
      throw InvalidParams("degree-gap edges must join a left and a right vertex");
    }
    g.insert_edge(l, r);
  }
  bool is_left(VertexId v) const { return side[v] == Side::Left; }
  bool is_right(VertexId v) const { return side[v] == Side::Right; }
  bool live(VertexId v) const { return side[v] != Side::None && !removed[v]; }

  std::vector<VertexId> left_vertices(bool live_only = false) const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      if (side[v] == Side::Left && (!live_only || !removed[v])) out.push_back(v);
    }
    return out;
  }
  std::vector<VertexId> right_vertices() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      if (side[v] == Side::Right) out.push_back(v);
    }
    return out;
  }

  /// Verifies the gap condition on the current graph; fills `why` on failure.
  bool check_gap(std::string* why = nullptr) const;

  DynGraph g;
  std::vector<Side> side;
  std::vector<char> removed;
  std::uint32_t x;
  double gamma;
};

struct LpmConfig {
  double c1_walk = 100.0;    // walk budget k = ceil(c1 * ln(n) / gamma^2)
  double c2_restart = 4.0;   // restart budget K = ceil(c2 * ln(n) / gamma)
  double c_len = 4.0;        // path-length constant in the epoch weight bound
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  std::optional<std::uint32_t> q_ep;  // default ceil(sqrt(n * gamma))
};

struct LpmDeleteResult {
  bool deleted_was_matched = false;
  bool left_tombstoned = false;
  /// Right vertex freed by this call (either the deleted edge's endpoint or
  /// the tombstoned vertex's mate); kNoVertex when none.
  VertexId freed_right = kNoVertex;
  bool reset_performed = false;
};

/// Decremental left-perfect-matching structure: maintains a matching that
/// the caller keeps left-perfect by invoking augment(u) whenever a live left
/// vertex with degree >= X is free.
class Lpm {
 public:
  virtual ~Lpm() = default;

  /// Deletes the edge (u,v), u on the left. Removes u entirely when its
  /// degree falls below X, dropping its matched edge first.
  virtual LpmDeleteResult erase_edge(VertexId u, VertexId v) = 0;

  /// Matches the free left vertex u via an augmenting path; returns the
  /// applied path (u ... r, alternating, first edge unmatched, r free).
  virtual std::vector<VertexId> augment(VertexId u) = 0;

  const Matching& matching() const { return m_; }
  const DegreeGapGraph& graph() const { return g_; }

  virtual std::uint64_t work() const = 0;
  virtual std::uint64_t walk_steps() const { return 0; }
  virtual std::uint64_t label_changes() const { return 0; }
  virtual std::uint64_t epoch_weight_violations() const { return 0; }
  virtual Dist max_sink_weight() const { return 0; }
  virtual std::uint32_t affected_count() const { return 0; }
  virtual const EsTree* tree() const { return nullptr; }

  /// Checks backend-internal soundness (residual encoding, tombstone
  /// hygiene). Returns an empty string when everything holds.
  virtual std::string validate() const;

 protected:
  Lpm(DegreeGapGraph g, const Matching& m0, LpmConfig cfg);

  void bind_matching(const Matching& m0);

  DegreeGapGraph g_;
  Matching m_;
  LpmConfig cfg_;
  double ln_n_;
};

std::unique_ptr<Lpm> make_lpm(LpmBackend backend, DegreeGapGraph g, const Matching& m0,
                              LpmConfig cfg = {});

/// Randomized backend, exposed so walk statistics can be probed directly.
class RandLpm final : public Lpm {
 public:
  RandLpm(DegreeGapGraph g, const Matching& m0, LpmConfig cfg);

  LpmDeleteResult erase_edge(VertexId u, VertexId v) override;
  std::vector<VertexId> augment(VertexId u) override;
  std::uint64_t work() const override { return steps_total_; }
  std::uint64_t walk_steps() const override { return steps_total_; }

  /// One random alternating walk from u with the given step budget; returns
  /// the loop-erased path on success, nullopt on timeout. Fresh randomness
  /// is drawn from the owned generator on every call.
  std::optional<std::vector<VertexId>> random_alternating_walk(VertexId u, std::uint64_t budget);

  std::uint64_t step_budget() const { return k_steps_; }
  std::uint64_t restart_budget() const { return k_restarts_; }

 private:
  std::mt19937_64 rng_;
  std::uint64_t k_steps_;
  std::uint64_t k_restarts_;
  std::uint64_t steps_total_ = 0;
  std::vector<std::uint32_t> on_path_;  // stamp-based position map
  std::uint32_t stamp_ = 0;
  std::vector<std::uint32_t> path_pos_;
};

/// Deterministic backend: residual graph + monotone ES tree, rebuilt every
/// q_ep deletions (an epoch).
class DetLpm final : public Lpm {
 public:
  DetLpm(DegreeGapGraph g, const Matching& m0, LpmConfig cfg);

  LpmDeleteResult erase_edge(VertexId u, VertexId v) override;
  std::vector<VertexId> augment(VertexId u) override;

  void reset_es();
  std::uint64_t work() const override;
  std::uint64_t label_changes() const override {
    return retired_labels_ + (tree_ ? tree_->label_changes() : 0);
  }
  std::uint64_t epoch_weight_violations() const override { return weight_violations_; }
  Dist max_sink_weight() const override { return max_sink_weight_; }
  std::uint32_t affected_count() const override { return static_cast<std::uint32_t>(r_aff_.size()); }
  const EsTree* tree() const override { return tree_.get(); }
  std::uint32_t epoch_budget() const { return q_ep_; }
  std::uint32_t deletions_in_epoch() const { return num_deletions_; }
  std::uint64_t resets() const { return resets_; }

  std::string validate() const override;

 private:
  VertexId sink() const { return g_.g.vertex_count(); }
  void add_sink_arc(VertexId r);

  std::unique_ptr<EsTree> tree_;
  std::uint32_t q_ep_;
  std::uint32_t num_deletions_ = 0;
  std::vector<char> affected_;
  std::vector<VertexId> r_aff_;
  Dist max_sink_weight_ = 0;
  std::uint64_t weight_violations_ = 0;
  std::uint64_t resets_ = 0;
  std::uint64_t retired_work_ = 0;  // counters of trees discarded at resets
  std::uint64_t retired_labels_ = 0;
};

}  // namespace dynamatch
