#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "elfarol/csv.hpp"
#include "elfarol/recorder.hpp"
#include "support/fixtures.hpp"
#include "support/stub_llm.hpp"

using namespace elfarol;
using elfarol::testing::scratch_dir;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Runs the installed binary with sh -c so env prefixes work in args.
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const char* bin = std::getenv("ELFAROL_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "ELFAROL_BIN must point at the cli binary");
  const auto dir = scratch_dir("cli_io");
  const auto out_path = dir / "out.txt";
  const auto err_path = dir / "err.txt";
  const std::string command = env_prefix + " \"" + std::string(bin) + "\" " + args + " > \"" +
                              out_path.string() + "\" 2> \"" + err_path.string() + "\"";
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_all(out_path);
  result.err = read_all(err_path);
  return result;
}

}  // namespace

TEST_CASE("missing subcommand or bad flags exit with the config code") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("run").exit_code == 2);  // --out is required
  CHECK(run_cli("frobnicate").exit_code == 2);
  const CliResult bad_brain =
      run_cli("run --brain warp --steps 1 --out " + scratch_dir("cli_bad").string());
  CHECK(bad_brain.exit_code == 2);
  CHECK(bad_brain.err.rfind("error code=config", 0) == 0);
}

TEST_CASE("run executes, prints a per-step summary, and records the trace") {
  const auto dir = scratch_dir("cli_run");
  const CliResult result =
      run_cli("run --brain greedy --steps 25 --seed 1 --out " + dir.string());
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("step 0 attendance ") != std::string::npos);
  CHECK(result.out.find("run complete:") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "trace.jsonl"));
  const RunLog log = load_run(dir);
  CHECK(log.n_steps() == 25);
  CHECK(log.manifest.brain_kind == "greedy");
}

TEST_CASE("identical seeds give byte-identical traces and replay verifies") {
  const auto a = scratch_dir("cli_det_a");
  const auto b = scratch_dir("cli_det_b");
  CHECK(run_cli("run --quiet --brain random --steps 30 --seed 42 --out " + a.string()).exit_code ==
        0);
  CHECK(run_cli("run --quiet --brain random --steps 30 --seed 42 --out " + b.string()).exit_code ==
        0);
  CHECK(read_all(a / "trace.jsonl") == read_all(b / "trace.jsonl"));

  const CliResult replay = run_cli("replay " + a.string());
  CHECK(replay.exit_code == 0);
  CHECK(replay.out.find("replay OK") != std::string::npos);
}

TEST_CASE("replay on a missing directory is a data error") {
  const CliResult result = run_cli("replay " + scratch_dir("cli_replay_missing").string());
  CHECK(result.exit_code == 4);
  CHECK(result.err.rfind("error code=", 0) == 0);
  CHECK(result.err.find("\n", result.err.find("error code=")) == result.err.size() - 1);
}

TEST_CASE("llm run without a credential fails before step 0 with the transport code") {
  const auto dir = scratch_dir("cli_llm_nokey");
  const CliResult result = run_cli("run --brain llm --steps 1 --out " + dir.string(),
                                   "env -u ELFAROL_API_KEY");
  CHECK(result.exit_code == 3);
  CHECK(result.err.rfind("error code=auth", 0) == 0);
  CHECK_FALSE(std::filesystem::exists(dir / "trace.jsonl"));
}

TEST_CASE("llm run works end to end through the cli against a stub endpoint") {
  elfarol::testing::StubLlmServer stub([](int, const nlohmann::json& body) {
    const std::string prompt = elfarol::testing::StubLlmServer::prompt_of(body);
    const char* action = prompt.find("outside") != std::string::npos ? "x+1" : "stay";
    const std::string reply = std::string("Message: on my way #friday\nMemory: keep going\n") +
                              "Action: " + action;
    return std::make_pair(200, elfarol::testing::StubLlmServer::completion_body(reply));
  });
  const auto cfg_path = scratch_dir("cli_llm_cfg") / "scenario.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "n_agents = 4\nbrain = llm\nllm_max_concurrency = 4\n";
  }
  const auto dir = scratch_dir("cli_llm_run");
  const CliResult result =
      run_cli("run --quiet --config " + cfg_path.string() + " --steps 3 --seed 21 --out " +
                  dir.string(),
              "env ELFAROL_API_KEY=stub-key ELFAROL_API_BASE=" + stub.url());
  CHECK(result.exit_code == 0);
  const RunLog log = load_run(dir);
  CHECK(log.manifest.brain_kind == "llm");
  CHECK(log.n_steps() == 3);
  CHECK(log.at(0, 0).message == "on my way #friday");
  CHECK(log.at(0, 0).memory == "keep going");
  CHECK(std::filesystem::exists(dir / "transcripts.jsonl"));

  // the recorded llm trace feeds the analyzer unchanged
  const auto out = scratch_dir("cli_llm_report");
  CHECK(run_cli("analyze " + dir.string() + " --out " + out.string() + " --window 1").exit_code ==
        0);
  const auto exits = csv::read_file(out / "exit_rate_aligned.csv");
  CHECK(exits.size() == 4);  // header + offsets -1..1 (hashtag at step 0)
  const auto tokens = csv::read_file(out / "tokens.csv");
  bool found = false;
  for (const auto& row : tokens)
    if (!row.empty() && row[0] == "friday") found = true;
  CHECK(found);

  // and the replay backend re-executes it bit for bit
  const CliResult replay = run_cli("replay " + dir.string());
  CHECK(replay.exit_code == 0);
  CHECK(replay.out.find("replay OK") != std::string::npos);
}

TEST_CASE("venue and config-file settings land in the manifest") {
  const auto cfg_path = scratch_dir("cli_cfg") / "scenario.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "# two-line scenario\n";
    cfg << "n_agents = 5\n";
    cfg << "comm_radius = 4\n";
  }
  const auto dir = scratch_dir("cli_venue");
  const CliResult result = run_cli("run --quiet --config " + cfg_path.string() +
                                   " --brain random --steps 3 --seed 9 --venue Library --out " +
                                   dir.string());
  CHECK(result.exit_code == 0);
  const RunLog log = load_run(dir);
  CHECK(log.manifest.config.venue_name == "Library");
  CHECK(log.manifest.config.n_agents == 5);
  CHECK(log.manifest.config.comm_radius == 4.0);

  const CliResult bad = run_cli("run --config " + cfg_path.string() + "x --out " +
                                scratch_dir("cli_badcfg").string());
  CHECK(bad.exit_code == 2);
}

TEST_CASE("analyze writes the report files and tolerates a broken run in the list") {
  const auto good = scratch_dir("cli_an_good");
  CHECK(run_cli("run --quiet --brain threshold --steps 40 --seed 3 --out " + good.string())
            .exit_code == 0);
  const auto broken = scratch_dir("cli_an_broken");  // empty directory
  const auto out = scratch_dir("cli_an_out");
  const CliResult result =
      run_cli("analyze " + good.string() + " " + broken.string() + " --out " + out.string());
  CHECK(result.exit_code == 0);
  CHECK(result.err.find("warning: skipping") != std::string::npos);
  for (const char* name :
       {"timing.csv", "delta_t_histogram.csv", "attendance.csv", "action_table.csv",
        "action_summary.csv", "durations.csv", "duration_stats.csv", "exit_rate_aligned.csv",
        "speed_profile.csv", "tokens.csv", "delta_t_histogram.svg", "attendance.svg",
        "exit_rate_aligned.svg", "speed_profile.svg", "messages.jsonl"})
    CHECK(std::filesystem::exists(out / name));

  SUBCASE("zero loadable runs is a data error") {
    const CliResult none = run_cli("analyze " + broken.string() + " --out " +
                                   scratch_dir("cli_an_none").string());
    CHECK(none.exit_code == 4);
    CHECK(none.err.find("error code=data") != std::string::npos);
  }
}

TEST_CASE("export honors the required format flag") {
  const auto run_dir = scratch_dir("cli_export_run");
  CHECK(run_cli("run --quiet --brain greedy --steps 10 --seed 2 --out " + run_dir.string())
            .exit_code == 0);
  const auto out = scratch_dir("cli_export_out");
  CHECK(run_cli("export " + run_dir.string() + " --out " + out.string() + " --format csv")
            .exit_code == 0);
  CHECK(std::filesystem::exists(out / "timing.csv"));
  CHECK_FALSE(std::filesystem::exists(out / "attendance.svg"));
  CHECK_FALSE(std::filesystem::exists(out / "messages.jsonl"));

  CHECK(run_cli("export " + run_dir.string() + " --out " + out.string()).exit_code == 2);
}

TEST_CASE("compare of identical sets yields identical columns") {
  const auto run_dir = scratch_dir("cli_cmp_run");
  CHECK(run_cli("run --quiet --brain threshold --steps 30 --seed 6 --out " + run_dir.string())
            .exit_code == 0);
  const auto out = scratch_dir("cli_cmp_out");
  const CliResult result = run_cli("compare --a " + run_dir.string() + " --b " + run_dir.string() +
                                   " --label-a left --label-b right --out " + out.string());
  CHECK(result.exit_code == 0);
  const auto rows = csv::read_file(out / "compare_delta_t.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][2] == rows[i][3]);
  const auto tokens = csv::read_file(out / "compare_tokens.csv");
  REQUIRE(tokens.size() >= 2);
  CHECK(tokens[1][0] == "together");

  SUBCASE("an empty set is an error") {
    const CliResult empty = run_cli("compare --a " + run_dir.string() + " --b " +
                                    scratch_dir("cli_cmp_empty").string() + " --out " +
                                    scratch_dir("cli_cmp_out2").string());
    CHECK(empty.exit_code == 4);
  }
}
