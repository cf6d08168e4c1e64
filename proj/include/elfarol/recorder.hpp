#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "elfarol/world.hpp"

namespace elfarol {

// One agent at one step; the unit of the JSONL trace. crowded_before is the
// status the agent observed when deciding, not the post-move status.
struct StepRecord {
  int step = 0;
  int agent_id = 0;
  Position pos_before;
  Action action = Action::Stay;
  Position pos_after;
  std::string message;
  std::string memory;
  bool inside_after = false;
  bool crowded_before = false;
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct RunManifest {
  int schema_version = 1;
  std::string engine_version;
  std::string start_time;  // informational; never compared by replay
  std::string brain_kind;
  SimConfig config;
  std::vector<Position> initial_positions;
  bool complete = false;
  int steps_completed = 0;
};

struct RunLog {
  RunManifest manifest;
  std::vector<StepRecord> records;  // ordered by (step, agent_id)

  int n_agents() const { return manifest.config.n_agents; }
  int n_steps() const {
    return n_agents() == 0 ? 0 : static_cast<int>(records.size()) / n_agents();
  }
  const StepRecord& at(int step, int agent_id) const {
    return records[static_cast<std::size_t>(step) * static_cast<std::size_t>(n_agents()) +
                   static_cast<std::size_t>(agent_id)];
  }
};

// Streams records into <dir>/trace.jsonl; the manifest is written up front
// (complete=false) and rewritten by finalize(). Records must arrive in
// (step, agent_id) order and satisfy the motion invariants or the append is
// rejected with ConsistencyError.
class RunWriter {
 public:
  RunWriter(std::filesystem::path dir, RunManifest manifest);
  ~RunWriter();

  void append(const StepRecord& rec);
  void flush();  // durability point at step boundaries
  void finalize(int steps_completed, bool complete);

  const std::filesystem::path& dir() const { return dir_; }
  static std::filesystem::path trace_path(const std::filesystem::path& dir);
  static std::filesystem::path manifest_path(const std::filesystem::path& dir);

 private:
  void write_manifest();

  std::filesystem::path dir_;
  RunManifest manifest_;
  std::ofstream trace_;
  int next_step_ = 0;
  int next_agent_ = 0;
  bool finalized_ = false;
};

enum class LoadMode {
  Strict,   // schema + ordering + motion/flag invariants (analysis path)
  Lenient,  // schema + ordering only (replay verification path)
};

// Loads and validates a run directory. ParseError carries the offending line
// number; SchemaError names the missing field; ConsistencyError reports
// completeness/ordering/invariant breaches. Unknown extra fields are ignored.
RunLog load_run(const std::filesystem::path& dir, LoadMode mode = LoadMode::Strict);

// JSON mappings shared by the manifest and the python bindings.
std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);
std::string record_to_json_line(const StepRecord& rec);

}  // namespace elfarol
