#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "elfarol/brains.hpp"
#include "elfarol/recorder.hpp"
#include "elfarol/world.hpp"

namespace elfarol {

struct StepSummary {
  int step = 0;        // step just executed
  int attendance = 0;  // agents inside after the transition
  int n_agents = 0;
  bool crowded = false;
};

struct RunOptions {
  SimConfig config;
  std::filesystem::path out_dir;
  // Overrides the seeded placement; used by replay so foreign traces
  // re-execute from their recorded placement rather than the RNG.
  std::optional<std::vector<Position>> initial_positions;
  std::function<void(const StepSummary&)> on_step;
};

struct RunResult {
  std::filesystem::path dir;
  int steps_completed = 0;
  bool complete = false;
  int final_attendance = 0;
};

// Executes the synchronous loop: snapshot -> observations carrying the
// previous step's inbox -> decide batch (barrier) -> step -> record. Messages
// spoken at step t are delivered at step t+1 to the speaker's neighbors as of
// the snapshot they were spoken from. On a mid-step brain failure the trace
// is retained up to the last full step and the manifest is marked incomplete
// before the error propagates.
RunResult run_simulation(const RunOptions& opts, Brain* brain_override = nullptr);

struct ReplayVerdict {
  bool ok = false;
  // First mismatching record when !ok (negative when the mismatch is a
  // length difference rather than a differing line).
  int step = -1;
  int agent_id = -1;
  std::string detail;
};

// Re-executes a completed run under the Replay brain and byte-compares the
// regenerated trace against the original. Refuses incomplete runs.
ReplayVerdict verify_replay(const std::filesystem::path& run_dir,
                            const std::filesystem::path& scratch_dir);

}  // namespace elfarol
