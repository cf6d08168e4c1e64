#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "elfarol/analysis.hpp"
#include "elfarol/export.hpp"
#include "elfarol/recorder.hpp"
#include "elfarol/runner.hpp"
#include "elfarol/scenario.hpp"
#include "elfarol/version.hpp"

namespace fs = std::filesystem;
using namespace elfarol;

namespace {

std::string one_line(std::string text) {
  for (char& c : text)
    if (c == '\n' || c == '\r') c = ' ';
  return text;
}

[[noreturn]] void fail(const Error& e) {
  std::cerr << "error code=" << e.code() << " " << one_line(e.what()) << "\n";
  std::exit(e.exit_code());
}

struct AnalyzeFlags {
  std::vector<std::string> run_dirs;
  std::string out_dir;
  int window = 30;
  double bin_width = 1.0;       // speed-profile bin width
  double delta_bin_width = 50;  // delta_t histogram bin width
  double cluster_dist = 10.0;
  int horizon = 50;
  std::string stopwords_file;
  std::string format = "both";
  std::string centroid = "global";
};

void add_analyze_flags(CLI::App* cmd, AnalyzeFlags& flags, bool format_required) {
  cmd->add_option("runs", flags.run_dirs, "run directories to analyze")->required();
  cmd->add_option("--out", flags.out_dir, "output directory for report files")->required();
  cmd->add_option("--window", flags.window, "half-width of the event-aligned window (steps)");
  cmd->add_option("--bin-width", flags.bin_width, "speed-profile bin width (distance units)");
  cmd->add_option("--delta-bin", flags.delta_bin_width, "delta_t histogram bin width (steps)");
  cmd->add_option("--cluster-dist", flags.cluster_dist, "clustering radius around the centroid");
  cmd->add_option("--horizon", flags.horizon, "stay/leave classification horizon after T_over");
  cmd->add_option("--stopwords", flags.stopwords_file, "stopword list file (one word per line)");
  auto* fmt = cmd->add_option("--format", flags.format, "output format")
                  ->check(CLI::IsMember({"csv", "svg", "both"}));
  if (format_required) fmt->required();
  cmd->add_option("--td-centroid", flags.centroid,
                  "centroid for clustering time: mean of all agents or of the largest "
                  "communication group")
      ->check(CLI::IsMember({"global", "component"}));
}

AnalyzeOptions to_options(const AnalyzeFlags& flags) {
  AnalyzeOptions options;
  options.window = flags.window;
  options.speed_bin_width = flags.bin_width;
  options.delta_t_bin_width = flags.delta_bin_width;
  options.cluster_dist = flags.cluster_dist;
  options.duration_horizon = flags.horizon;
  options.centroid_mode =
      flags.centroid == "component" ? CentroidMode::LargestComponent : CentroidMode::GlobalMean;
  if (!flags.stopwords_file.empty()) options.stopwords = load_stopwords(flags.stopwords_file);
  return options;
}

ExportFormat to_format(const std::string& name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "svg") return ExportFormat::Svg;
  return ExportFormat::Both;
}

std::vector<std::string> run_labels(const std::vector<std::string>& dirs) {
  std::vector<std::string> labels;
  std::set<std::string> seen;
  bool collision = false;
  for (const std::string& d : dirs) {
    std::string base = fs::path(d).filename().string();
    if (base.empty()) base = fs::path(d).parent_path().filename().string();
    if (!seen.insert(base).second) collision = true;
    labels.push_back(base);
  }
  if (collision) return dirs;  // fall back to the paths as given
  return labels;
}

// Loads every run it can; failures are reported to stderr and skipped.
std::pair<std::vector<RunLog>, std::vector<std::string>> load_runs(
    const std::vector<std::string>& dirs) {
  std::vector<RunLog> logs;
  std::vector<std::string> kept;
  const std::vector<std::string> labels = run_labels(dirs);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    try {
      logs.push_back(load_run(dirs[i], LoadMode::Strict));
      kept.push_back(labels[i]);
    } catch (const Error& e) {
      std::cerr << "warning: skipping " << dirs[i] << ": " << one_line(e.what()) << "\n";
    }
  }
  if (logs.empty()) throw DataError("no loadable runs");
  return {std::move(logs), std::move(kept)};
}

int cmd_run(const std::string& config_file, const std::string& brain, int steps, long long seed,
            const std::string& venue, const std::string& out_dir, bool quiet) {
  SimConfig cfg = config_file.empty() ? SimConfig{} : load_scenario(config_file);
  if (!brain.empty()) {
    if (auto kind = brain_kind_from_name(brain))
      cfg.brain.kind = *kind;
    else
      throw ConfigError("unknown brain '" + brain + "'");
  }
  if (steps >= 0) cfg.max_steps = steps;
  if (seed >= 0) cfg.rng_seed = static_cast<std::uint64_t>(seed);
  if (!venue.empty()) cfg.venue_name = venue;
  validate(cfg);

  RunOptions opts;
  opts.config = cfg;
  opts.out_dir = out_dir;
  if (!quiet)
    opts.on_step = [](const StepSummary& s) {
      std::cout << "step " << s.step << " attendance " << s.attendance << "/" << s.n_agents
                << (s.crowded ? " crowded" : "") << "\n";
    };
  const RunResult result = run_simulation(opts);
  std::cout << "run complete: " << result.dir.string() << " steps=" << result.steps_completed
            << " final_attendance=" << result.final_attendance << "\n";
  return 0;
}

int cmd_replay(const std::string& run_dir, std::string scratch) {
  if (scratch.empty()) scratch = (fs::path(run_dir) / "replay_check").string();
  const ReplayVerdict verdict = verify_replay(run_dir, scratch);
  if (verdict.ok) {
    std::cout << "replay OK: " << verdict.detail << "\n";
    return 0;
  }
  std::cerr << "error code=replay_mismatch " << one_line(verdict.detail) << "\n";
  return 4;
}

int cmd_analyze(const AnalyzeFlags& flags, bool with_messages) {
  auto [logs, ids] = load_runs(flags.run_dirs);
  const AnalysisReport report = analyze_runs(logs, ids, to_options(flags));
  const auto files = export_report(report, flags.out_dir, to_format(flags.format));
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  if (with_messages)
    std::cout << "wrote " << export_messages(logs, ids, flags.out_dir).string() << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs_a, const std::vector<std::string>& dirs_b,
                const std::string& label_a, const std::string& label_b,
                const std::vector<std::string>& tokens, const AnalyzeFlags& flags) {
  auto [logs_a, ids_a] = load_runs(dirs_a);
  auto [logs_b, ids_b] = load_runs(dirs_b);
  const AnalyzeOptions options = to_options(flags);
  CompareReport compare;
  compare.label_a = label_a;
  compare.label_b = label_b;
  compare.a = analyze_runs(logs_a, ids_a, options);
  compare.b = analyze_runs(logs_b, ids_b, options);
  compare.query_tokens = tokens;
  const auto files = export_compare(compare, flags.out_dir, to_format(flags.format));
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial El Farol Bar simulator and trace analyzer"};
  app.set_version_flag("--version", kEngineVersion);
  app.require_subcommand(1);

  // run
  std::string config_file, brain, venue, out_dir;
  int steps = -1;
  long long seed = -1;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "execute a simulation and record its trace");
  run_cmd->add_option("--config", config_file, "scenario config file");
  run_cmd->add_option("--brain", brain, "decision backend: llm, greedy, threshold, random, replay");
  run_cmd->add_option("--steps", steps, "number of steps to run");
  run_cmd->add_option("--seed", seed, "rng seed for placement and scripted brains");
  run_cmd->add_option("--venue", venue, "venue name substituted into prompts");
  run_cmd->add_option("--out", out_dir, "run directory to create")->required();
  run_cmd->add_flag("--quiet", quiet, "suppress the per-step attendance summary");

  // replay
  std::string replay_dir, scratch_dir;
  auto* replay_cmd = app.add_subcommand("replay", "re-execute a run and verify the trace");
  replay_cmd->add_option("run_dir", replay_dir, "completed run directory")->required();
  replay_cmd->add_option("--scratch", scratch_dir, "where to write the regenerated trace");

  // analyze / export
  AnalyzeFlags analyze_flags, export_flags;
  auto* analyze_cmd = app.add_subcommand("analyze", "compute the full report for one or more runs");
  add_analyze_flags(analyze_cmd, analyze_flags, false);
  auto* export_cmd = app.add_subcommand("export", "write report tables/charts in one format");
  add_analyze_flags(export_cmd, export_flags, true);

  // compare
  AnalyzeFlags compare_flags;
  std::vector<std::string> dirs_a, dirs_b, query_tokens{"together"};
  std::string label_a = "bar", label_b = "library";
  auto* compare_cmd = app.add_subcommand("compare", "compare two run sets side by side");
  compare_cmd->add_option("--a", dirs_a, "first run set")->required();
  compare_cmd->add_option("--b", dirs_b, "second run set")->required();
  compare_cmd->add_option("--label-a", label_a, "name of the first set");
  compare_cmd->add_option("--label-b", label_b, "name of the second set");
  compare_cmd->add_option("--tokens", query_tokens, "tokens to rank per scenario");
  compare_cmd->add_option("--out", compare_flags.out_dir, "output directory")->required();
  compare_cmd->add_option("--stopwords", compare_flags.stopwords_file, "stopword list file");
  compare_cmd->add_option("--format", compare_flags.format, "output format")
      ->check(CLI::IsMember({"csv", "svg", "both"}));
  compare_cmd->add_option("--delta-bin", compare_flags.delta_bin_width,
                          "delta_t histogram bin width (steps)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error code=config " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_file, brain, steps, seed, venue, out_dir, quiet);
    if (replay_cmd->parsed()) return cmd_replay(replay_dir, scratch_dir);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze_flags, true);
    if (export_cmd->parsed()) return cmd_analyze(export_flags, false);
    if (compare_cmd->parsed())
      return cmd_compare(dirs_a, dirs_b, label_a, label_b, query_tokens, compare_flags);
  } catch (const Error& e) {
    fail(e);
  } catch (const std::exception& e) {
    std::cerr << "error code=internal " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
