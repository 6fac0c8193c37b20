#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dynamatch/core.hpp"
#include "dynamatch/edcs.hpp"
#include "dynamatch/lpm.hpp"
#include "dynamatch/staticmatch.hpp"

namespace dynamatch {

struct EngineParams {
  std::uint32_t cap_b = 0;  // EDCS bound B
  double eps = 0.0;
  LpmBackend backend = LpmBackend::Deterministic;
  std::uint64_t seed = 1;
  std::uint32_t recourse_cap = 4;
  /// gamma defaults to delta/8; the delta/1e8 analysis constant sits behind
  /// this flag because it makes walk budgets astronomical at bench scale.
  bool paper_gamma = false;
  std::optional<double> gamma_override;
  std::optional<double> x_override;
  LpmConfig lpm;

  // Test instrumentation: drop the adjunct rematch work of one update.
  std::optional<std::uint64_t> fault_skip_rematch_at;

  double delta() const { return 100.0 * eps; }
  double thr_vhi() const { return (0.5 + delta()) * cap_b; }           // strictly above
  double thr_hi() const { return (0.5 + delta() - eps) * cap_b; }      // at or above
  double thr_med() const { return (0.5 - delta()) * cap_b; }           // at or above (below hi)
  double thr_alo() const { return (0.5 - delta() + eps) * cap_b; }     // at or below, within med
  double x_value() const { return x_override.value_or((0.5 + delta() - 2.0 * eps) * cap_b); }
  double gamma_value() const {
    if (gamma_override) return *gamma_override;
    return paper_gamma ? delta() / 1e8 : delta() / 8.0;
  }
  double kappa() const { return 3.0 * delta(); }
  double delta_static() const { return (0.5 + delta()) * cap_b; }
};

enum class NodeBand : std::uint8_t { Lo, Med, Hi };

struct EngineCounters {
  std::uint64_t updates = 0;
  std::uint64_t phase_inits = 0;
  std::uint64_t adj_scans = 0;        // adjunct free-neighbor search probes
  std::uint64_t fadj_ops = 0;         // damaged free-set maintenance touches
  std::uint64_t init_work = 0;        // phase initialization probes
  std::uint64_t h_flips = 0;
  std::uint64_t h_scans = 0;
  std::uint64_t lpm_work = 0;         // ES scans/updates or walk steps
  std::uint64_t walk_steps = 0;
  std::uint64_t es_label_changes = 0;
  std::uint64_t lpm_deletes = 0;
  std::uint64_t lpm_augments = 0;
  std::uint64_t matchmost_edges = 0;  // edges colored at phase starts
  std::uint64_t mbase_node_changes = 0;
  std::uint32_t max_recourse = 0;
  std::uint64_t epoch_weight_violations = 0;

  std::uint64_t total_work() const {
    return adj_scans + fadj_ops + init_work + h_flips + h_scans + lpm_work + matchmost_edges;
  }
};

/// Fully dynamic maximal matching. Works in phases of delta*n updates; each
/// phase freezes the EDCS snapshot, classifies vertices by snapshot degree,
/// matches the high side through an LPM on the hi/lo subgraph, and keeps a
/// maximal adjunct matching among everything the base matching leaves free.
class Engine {
 public:
  Engine(std::uint32_t n, EngineParams params);

  void handle_update(const UpdateEvent& e);

  Matching current_matching() const;
  std::vector<std::pair<VertexId, VertexId>> final_edges() const;
  bool final_matched(VertexId v) const;
  VertexId final_mate(VertexId v) const;

  const DynGraph& graph() const { return g_; }
  const EdcsState& edcs() const { return *edcs_; }
  const Matching& base_matching() const { return m_base_; }
  const Matching& adjunct_matching() const { return m_adj_; }
  const EngineParams& params() const { return params_; }
  const EngineCounters& counters() const { return counters_; }
  std::uint64_t phase() const { return phase_number_; }
  std::uint64_t phase_length() const { return phase_len_; }
  std::uint64_t updates_seen() const { return counters_.updates; }

  std::uint32_t hi_count() const { return hi_count_; }
  std::uint32_t damaged_count() const { return static_cast<std::uint32_t>(dmg_list_.size()); }
  std::uint32_t med_in_adj_count() const { return med_in_adj_; }
  std::uint32_t free_med_count() const { return free_med_count_; }
  std::uint64_t enew_size() const { return e_new_.edge_count(); }

  /// Invariant battery. `expensive` additionally reconstructs derived sets
  /// (exact free-neighbor sets, the base-matching set identity) from scratch.
  std::vector<std::string> audit(bool expensive) const;

 private:
  // --- classification ---
  NodeBand band_of(VertexId v) const { return band_[v]; }
  bool is_hi(VertexId v) const { return band_[v] == NodeBand::Hi; }
  bool is_med(VertexId v) const { return band_[v] == NodeBand::Med; }
  bool in_vadj(VertexId v) const { return in_vadj_[v] != 0; }
  bool adj_free(VertexId v) const { return in_vadj(v) && !m_adj_.is_matched(v); }

  struct UpdateCtx {
    std::map<VertexId, bool> mbase_before;  // matched state at update start
    std::vector<VertexId> rematch;
  };

  void classify();
  void start_phase();
  void mbase_match(UpdateCtx& ctx, VertexId a, VertexId b);
  void mbase_unmatch(UpdateCtx& ctx, VertexId a, VertexId b);
  void note_mbase(UpdateCtx& ctx, VertexId v);
  void match_via_augment(UpdateCtx& ctx, VertexId v);
  void insert_damaged(UpdateCtx& ctx, VertexId v);
  void process_transitions(UpdateCtx& ctx);
  void do_enter_vadj(UpdateCtx& ctx, VertexId v);
  void do_exit_vadj(UpdateCtx& ctx, VertexId v);
  void became_adj_free(UpdateCtx& ctx, VertexId v);
  void stopped_being_adj_free(VertexId v);
  void run_rematch_queue(UpdateCtx& ctx);
  VertexId find_free_neighbor(VertexId v);
  void insert_madj(VertexId a, VertexId b);
  void remove_madj_edge(UpdateCtx& ctx, VertexId a, VertexId b);
  void handle_insert(UpdateCtx& ctx, VertexId u, VertexId v);
  void handle_delete(UpdateCtx& ctx, VertexId u, VertexId v);
  void finish_update(UpdateCtx& ctx);
  void medlist_insert(VertexId v);
  void medlist_erase(VertexId v);
  void freemed_insert(VertexId v);
  void freemed_erase(VertexId v);
  void pull_lpm_counters();

  std::uint32_t n_;
  EngineParams params_;
  std::uint64_t phase_len_;
  std::uint32_t x_int_;

  DynGraph g_;
  std::unique_ptr<EdcsState> edcs_;

  // Phase-frozen state.
  std::unique_ptr<DynGraph> h_init_;
  std::unique_ptr<DynGraph> h_core_;
  std::vector<NodeBand> band_;
  std::vector<char> vhi_, alo_;
  std::vector<char> damaged_;
  std::vector<VertexId> dmg_list_;
  std::uint32_t hi_count_ = 0;

  Matching m_most_;
  Matching m_base_;
  Matching m_adj_;
  std::unique_ptr<Lpm> lpm_;

  // Adjunct bookkeeping.
  std::vector<char> in_vadj_;
  std::map<VertexId, std::set<VertexId>> f_adj_;  // damaged vertex -> exact free neighbors
  // Intrusive doubly-linked lists over vertex ids.
  std::vector<VertexId> med_prev_, med_next_;
  VertexId med_head_ = kNoVertex;
  std::uint32_t med_in_adj_ = 0;
  std::vector<VertexId> fmed_prev_, fmed_next_;
  VertexId fmed_head_ = kNoVertex;
  std::uint32_t free_med_count_ = 0;

  DynGraph e_new_;

  std::uint64_t update_in_phase_ = 0;
  std::uint64_t phase_number_ = 0;
  EngineCounters counters_;
  std::uint64_t lpm_work_baseline_ = 0;
  std::uint64_t walk_baseline_ = 0;
  std::uint64_t es_lbl_baseline_ = 0;
  std::uint64_t ew_baseline_ = 0;
};

}  // namespace dynamatch
