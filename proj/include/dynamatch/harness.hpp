#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dynamatch/core.hpp"
#include "dynamatch/engine.hpp"

namespace dynamatch {

enum class StreamModel : std::uint8_t {
  RandomInsertDelete,
  DecrementalFromDense,
  AdaptiveMatchedEdgeDeleter,
  FromFile,
};

StreamModel stream_model_from_name(const std::string& name);
std::string stream_model_name(StreamModel m);

struct StreamSpec {
  std::uint32_t n = 0;
  std::uint64_t length = 0;
  StreamModel model = StreamModel::RandomInsertDelete;
  double p_insert = 0.6;   // RandomInsertDelete
  double density = 1.0;    // dense-base models: fraction of all pairs
  bool star_base = false;  // adaptive model: star-heavy base instead of uniform
  std::string path;        // FromFile
  std::uint64_t seed = 1;
};

/// Answers the adaptive adversary's queries about the maintained matching.
class MatchingView {
 public:
  virtual ~MatchingView() = default;
  virtual bool matched(VertexId v) const = 0;
  virtual VertexId mate(VertexId v) const = 0;
};

/// Static stream generation. The adaptive model needs a matching oracle to
/// attack; when none is supplied, gen_stream simulates an Engine configured
/// by `adaptive_params` internally so the written stream is replayable.
std::vector<UpdateEvent> gen_stream(const StreamSpec& spec,
                                    const std::optional<EngineParams>& adaptive_params = {});

// Update-stream text format: first line "n <count>", then "+ u v" / "- u v".
void write_stream(std::ostream& os, std::uint32_t n, const std::vector<UpdateEvent>& events);
std::vector<UpdateEvent> read_stream(std::istream& is, std::uint32_t* n);
void write_stream_file(const std::string& path, std::uint32_t n,
                       const std::vector<UpdateEvent>& events);
std::vector<UpdateEvent> read_stream_file(const std::string& path, std::uint32_t* n);

/// Full scan for an edge with two free endpoints. Returns kNoVertex pair on
/// success, otherwise the first violating edge.
std::optional<std::pair<VertexId, VertexId>> oracle_verify(const DynGraph& g, const Matching& m);

enum class AuditLevel : std::uint8_t { Off, Sampled, Full };

struct RunConfig {
  EngineParams engine;
  AuditLevel audit = AuditLevel::Off;
  std::uint64_t audit_stride = 64;      // component validators at Full, oracle at Sampled
  std::uint64_t window = 256;           // metrics window length
  std::string matching_log_path;        // optional per-update matching dump
};

struct WindowRecord {
  std::uint64_t first_update = 0;
  std::uint64_t updates = 0;
  std::uint64_t work = 0;
  double wall_ms = 0.0;
};

struct RunMetrics {
  std::uint32_t n = 0;
  std::string model;
  std::string backend;
  std::uint64_t updates = 0;
  EngineCounters counters;
  double wall_ms = 0.0;
  std::uint64_t audit_failures = 0;
  std::uint64_t oracle_checks = 0;
  std::uint64_t base_updates = 0;  // adaptive runs: events spent building the base graph
  std::uint64_t base_work = 0;
  std::vector<WindowRecord> windows;

  double avg_work_per_update() const {
    return updates == 0 ? 0.0 : static_cast<double>(counters.total_work()) / updates;
  }
  /// Average work per update over the post-base (adversarial) window.
  double adaptive_avg_work() const {
    if (updates <= base_updates) return 0.0;
    return static_cast<double>(counters.total_work() - base_work) /
           static_cast<double>(updates - base_updates);
  }
};

std::string metrics_to_jsonl(const RunMetrics& m);
void write_metrics_file(const std::string& path, const RunMetrics& m);

/// Drives an Engine over a pre-generated stream. Throws AuditFailure (with
/// the update index) the moment a check fails when auditing is enabled.
RunMetrics run(const RunConfig& cfg, std::uint32_t n, const std::vector<UpdateEvent>& events,
               const std::string& model_name = "file");

/// Drives an Engine against the in-process adaptive adversary for `length`
/// updates over a dense or star-heavy base (built with insert events first).
RunMetrics run_adaptive(const RunConfig& cfg, const StreamSpec& spec,
                        std::vector<UpdateEvent>* realized = nullptr);

/// The trivial O(n)-scan maximal matching: match inserts greedily, repair
/// deletions by scanning both endpoints' full neighborhoods.
class NaiveMaximal : public MatchingView {
 public:
  explicit NaiveMaximal(std::uint32_t n) : g_(n), m_(n) {}

  void handle_update(const UpdateEvent& e);
  bool matched(VertexId v) const override { return m_.is_matched(v); }
  VertexId mate(VertexId v) const override { return m_.mate(v); }
  const DynGraph& graph() const { return g_; }
  const Matching& matching() const { return m_; }
  std::uint64_t work() const { return scans_; }

 private:
  void try_match(VertexId v);
  DynGraph g_;
  Matching m_;
  std::uint64_t scans_ = 0;
};

/// Runs the naive baseline against the adaptive adversary; returns average
/// scan work per update over the post-base window.
double naive_adaptive_work(const StreamSpec& spec);

/// Replays a stream and checks a per-update matching log (pairs per line)
/// for validity and maximality. Returns the first failing update index, or
/// nullopt when everything checks out.
std::optional<std::uint64_t> verify_matching_log(const std::string& stream_path,
                                                 const std::string& log_path);

}  // namespace dynamatch
