#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "elfarol/recorder.hpp"
#include "elfarol/world.hpp"

namespace elfarol::testing {

// Builds internally consistent RunLogs from explicit per-agent position
// trajectories, deriving actions, inside/crowded flags and the manifest.
// Positions must change by at most one unit move per step.
class FixtureBuilder {
 public:
  explicit FixtureBuilder(SimConfig cfg);

  // trajectory[t] = position at time t; all trajectories must share a length
  // of steps+1.
  FixtureBuilder& agent(std::vector<Position> trajectory);

  // Message/memory spoken by an agent at a record step.
  FixtureBuilder& message(int step, int agent_id, std::string text);
  FixtureBuilder& memory(int step, int agent_id, std::string text);

  RunLog build() const;

  // Writes manifest + trace via the real writer and returns the directory.
  std::filesystem::path write(const std::filesystem::path& dir) const;

 private:
  SimConfig cfg_;
  std::vector<std::vector<Position>> trajectories_;
  std::map<std::pair<int, int>, std::string> messages_;
  std::map<std::pair<int, int>, std::string> memories_;
};

// Convenience: a trajectory that stays put for the whole run.
std::vector<Position> hold(Position pos, int steps);

// Unique scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

// Two-squad scene with plantable timing on the default 50x50 grid, N=20,
// threshold 12. Twelve agents wait at (19,25) and enter the bar together at
// state t_b; eight walk in from (49,25) after `delay` idle steps, which makes
// the clustering condition (12 agents within 10 of the global centroid)
// first hold at state delay+5. So T_d = delay+5, T_b = t_b exactly.
elfarol::RunLog planted_timing_log(int t_b, int delay = 0, int total_steps = 30);

// N=6 scene with threshold_fraction 1 so T_over lands exactly at state 12.
// Prior-inside durations: stay group {10,12,11}, leave group {2,3,1}; the
// leave group exits at T_over + {5,7,3}. The duration-1 agent enters exactly
// at T_over.
elfarol::RunLog planted_duration_log(int total_steps = 70);

// N=5 logs with scripted enter/exit churn at depth-1 cells. Exit rates at
// steps 1..5 are {1/4, 0, 1/2, 0, 1/4} with the first hashtag at step 2 (A)
// and {1/4, 1/3, 0, 1/4, 0} with the first hashtag at step 3 (B).
elfarol::RunLog exit_pattern_log_a();
elfarol::RunLog exit_pattern_log_b();

// Quiet little log with no messages at all.
elfarol::RunLog no_hashtag_log();

}  // namespace elfarol::testing
