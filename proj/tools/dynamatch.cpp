#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dynamatch/harness.hpp"

using namespace dynamatch;

namespace {

AuditLevel audit_from_name(const std::string& s) {
  if (s == "off") return AuditLevel::Off;
  if (s == "sampled") return AuditLevel::Sampled;
  if (s == "full") return AuditLevel::Full;
  throw InvalidParams("audit must be off|sampled|full");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic maximal matching benchmark harness"};
  app.require_subcommand(1);

  // --- run ---
  auto* run_cmd = app.add_subcommand("run", "drive the engine over a stream");
  std::string stream_arg;
  std::uint32_t n = 0, cap_b = 0;
  double eps = 0.0, p_insert = 0.6, density = 1.0;
  std::string backend = "det", audit = "off", out_path, matching_log;
  std::uint64_t seed = 1, length = 0;
  bool star_base = false, paper_gamma = false;
  run_cmd->add_option("--stream", stream_arg,
                      "stream file path, or a model spec: random|dense|adaptive")
      ->required();
  run_cmd->add_option("--n", n, "vertex count (required for model specs)");
  run_cmd->add_option("--len", length, "stream length for model specs");
  run_cmd->add_option("--B", cap_b, "EDCS bound B")->required();
  run_cmd->add_option("--eps", eps, "EDCS eps (delta = 100*eps)")->required();
  run_cmd->add_option("--backend", backend, "det|rand");
  run_cmd->add_option("--audit", audit, "off|sampled|full");
  run_cmd->add_option("--seed", seed, "seed for engine and stream");
  run_cmd->add_option("--out", out_path, "metrics JSONL output path");
  run_cmd->add_option("--matching-log", matching_log, "per-update matching dump");
  run_cmd->add_option("--p-insert", p_insert, "insert probability (random model)");
  run_cmd->add_option("--density", density, "base density (dense/adaptive models)");
  run_cmd->add_flag("--star-base", star_base, "star-heavy base for the adaptive model");
  run_cmd->add_flag("--paper-gamma", paper_gamma, "use the delta/1e8 analysis gamma");

  // --- gen ---
  auto* gen_cmd = app.add_subcommand("gen", "generate a stream file");
  std::string model_name, gen_out;
  std::uint32_t gen_n = 0;
  std::uint64_t gen_len = 0, gen_seed = 1;
  double gen_p = 0.6, gen_density = 1.0;
  bool gen_star = false;
  std::uint32_t gen_b = 0;
  double gen_eps = 0.0;
  gen_cmd->add_option("--model", model_name, "random|dense|adaptive")->required();
  gen_cmd->add_option("--n", gen_n, "vertex count")->required();
  gen_cmd->add_option("--len", gen_len, "event budget")->required();
  gen_cmd->add_option("--seed", gen_seed, "seed");
  gen_cmd->add_option("--out", gen_out, "output path")->required();
  gen_cmd->add_option("--p-insert", gen_p, "insert probability (random model)");
  gen_cmd->add_option("--density", gen_density, "base density");
  gen_cmd->add_flag("--star-base", gen_star, "star-heavy base (adaptive)");
  gen_cmd->add_option("--B", gen_b, "engine B for the simulated adaptive target");
  gen_cmd->add_option("--eps", gen_eps, "engine eps for the simulated adaptive target");

  // --- verify ---
  auto* verify_cmd = app.add_subcommand("verify", "check a matching log against a stream");
  std::string v_stream, v_log;
  verify_cmd->add_option("--stream", v_stream, "stream file")->required();
  verify_cmd->add_option("--matching-log", v_log, "matching log file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      RunConfig cfg;
      cfg.engine.cap_b = cap_b;
      cfg.engine.eps = eps;
      cfg.engine.seed = seed;
      cfg.engine.paper_gamma = paper_gamma;
      cfg.engine.backend = backend == "rand" ? LpmBackend::Randomized : LpmBackend::Deterministic;
      cfg.audit = audit_from_name(audit);
      cfg.matching_log_path = matching_log;

      RunMetrics metrics;
      bool is_model = stream_arg == "random" || stream_arg == "dense" || stream_arg == "adaptive";
      if (is_model) {
        if (n == 0 || length == 0) throw InvalidParams("model streams need --n and --len");
        StreamSpec spec;
        spec.n = n;
        spec.length = length;
        spec.model = stream_model_from_name(stream_arg);
        spec.p_insert = p_insert;
        spec.density = density;
        spec.star_base = star_base;
        spec.seed = seed;
        if (spec.model == StreamModel::AdaptiveMatchedEdgeDeleter) {
          metrics = run_adaptive(cfg, spec);
        } else {
          auto events = gen_stream(spec);
          metrics = run(cfg, n, events, stream_arg);
        }
      } else {
        std::uint32_t file_n = 0;
        auto events = read_stream_file(stream_arg, &file_n);
        metrics = run(cfg, file_n, events, "file");
      }
      if (!out_path.empty()) {
        write_metrics_file(out_path, metrics);
      } else {
        std::cout << metrics_to_jsonl(metrics);
      }
      std::cerr << "processed " << metrics.updates << " updates in " << metrics.wall_ms
                << " ms; avg work/update " << metrics.avg_work_per_update() << "\n";
      return 0;
    }
    if (*gen_cmd) {
      StreamSpec spec;
      spec.n = gen_n;
      spec.length = gen_len;
      spec.model = stream_model_from_name(model_name);
      spec.p_insert = gen_p;
      spec.density = gen_density;
      spec.star_base = gen_star;
      spec.seed = gen_seed;
      std::optional<EngineParams> ep;
      if (gen_b != 0) {
        ep.emplace();
        ep->cap_b = gen_b;
        ep->eps = gen_eps > 0 ? gen_eps : 1.0 / gen_b;
        ep->seed = gen_seed;
      }
      auto events = gen_stream(spec, ep);
      write_stream_file(gen_out, gen_n, events);
      std::cerr << "wrote " << events.size() << " events to " << gen_out << "\n";
      return 0;
    }
    if (*verify_cmd) {
      auto bad = verify_matching_log(v_stream, v_log);
      if (bad) {
        std::cout << "FAIL at update " << *bad << "\n";
        return 1;
      }
      std::cout << "OK\n";
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
