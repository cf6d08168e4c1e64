#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "elfarol/recorder.hpp"

namespace elfarol {

// Per-step attendance counts, step 0 (initial placement) included, so the
// length is steps+1.
struct AttendanceSeries {
  std::vector<int> values;
};

struct TimingResult {
  std::optional<int> t_d;      // clustering time
  std::optional<int> t_b;      // crowding time
  std::optional<int> delta_t;  // t_b - t_d when both exist
};

// Frequencies of the five actions split by location (inside/outside) and the
// crowding status the agent observed when deciding.
struct ActionCell {
  long counts[5] = {0, 0, 0, 0, 0};  // indexed by Action
  long total() const { return counts[0] + counts[1] + counts[2] + counts[3] + counts[4]; }
  bool empty() const { return total() == 0; }
  std::optional<double> frequency(Action a) const {
    if (empty()) return std::nullopt;
    return static_cast<double>(counts[static_cast<int>(a)]) / static_cast<double>(total());
  }
  std::optional<double> stay_rate() const { return frequency(Action::Stay); }
  std::optional<double> move_rate() const {
    auto s = stay_rate();
    if (!s) return std::nullopt;
    return 1.0 - *s;
  }
};

struct ActionTable {
  // cell(inside, crowded)
  ActionCell cells[2][2];
  ActionCell& cell(bool inside, bool crowded) { return cells[inside ? 1 : 0][crowded ? 1 : 0]; }
  const ActionCell& cell(bool inside, bool crowded) const {
    return cells[inside ? 1 : 0][crowded ? 1 : 0];
  }
};

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Stay/leave split of the agents that were inside at the first crowding step,
// with the consecutive time each had already spent inside (ending at T_over
// inclusive, so the minimum duration is 1).
struct DurationComparison {
  int t_over = 0;
  std::vector<int> stay_durations;
  std::vector<int> leave_durations;
  std::optional<WelchResult> test;  // absent when either group has < 2 members
};

struct OffsetStat {
  int offset = 0;
  int runs_contributing = 0;
  std::optional<double> mean;    // absent when no run contributes
  std::optional<double> stddev;  // population standard deviation
};

// Exit rates re-indexed so each run's first hashtag step is offset 0.
struct ExitRateProfile {
  int window = 0;
  std::vector<OffsetStat> offsets;  // -window..+window in order
};

struct SpeedBin {
  double lo = 0.0;  // bin covers signed boundary distance [lo, lo+width)
  bool crowded = false;
  long count = 0;
  double mean_speed = 0.0;      // cells/step, in {0,1} per unit-move kinematics
  double mean_direction = 0.0;  // mean change of signed boundary distance
};

struct SpeedProfile {
  double bin_width = 1.0;
  std::vector<SpeedBin> bins;  // sorted by (lo, crowded)
};

struct TokenFrequency {
  std::map<std::string, long> counts;
  long total = 0;
  // 1-based rank by descending count (ties broken by token); absent when the
  // token does not occur.
  std::optional<int> rank_of(const std::string& token) const;
  std::optional<double> relative_frequency(const std::string& token) const;
};

// ---- per-run series -------------------------------------------------------

AttendanceSeries attendance_series(const RunLog& log);

enum class CentroidMode {
  GlobalMean,        // centroid of all agent positions
  LargestComponent,  // centroid of the largest communication-graph component
};

// First step at which at least ceil(frac * N) agents lie within Euclidean
// distance `dist` of the centroid; absent if never.
std::optional<int> clustering_time(const RunLog& log, double dist = 10.0, double frac = 0.6,
                                   CentroidMode mode = CentroidMode::GlobalMean);

// First step with attendance >= threshold_count; absent if never.
std::optional<int> crowding_time(const RunLog& log);

std::optional<int> delta_t(const RunLog& log, double dist = 10.0, double frac = 0.6,
                           CentroidMode mode = CentroidMode::GlobalMean);

TimingResult timing_result(const RunLog& log, double dist = 10.0, double frac = 0.6,
                           CentroidMode mode = CentroidMode::GlobalMean);

// Exit rate per step t >= 1: agents that were inside at t-1 and outside at t,
// divided by attendance at t-1; absent when the bar was empty. Index 0 is
// always absent so indices align with steps.
std::vector<std::optional<double>> exit_rate_series(const RunLog& log);

// First step whose messages contain a '#'-prefixed word-character token.
std::optional<int> first_hashtag_step(const RunLog& log);

DurationComparison duration_comparison(const RunLog& log, int horizon = 50);

// ---- cross-run aggregates -------------------------------------------------

// All logs must share n_agents and threshold_count.
ActionTable action_table(std::span<const RunLog> logs);

// Pools stay/leave groups across runs (each with its own T_over); runs
// without a crowding step are skipped. Absent when no run qualifies.
std::optional<DurationComparison> pooled_duration_comparison(std::span<const RunLog> logs,
                                                             int horizon = 50);

ExitRateProfile event_aligned_exit_rate(std::span<const RunLog> logs, int window);

SpeedProfile speed_direction_profile(std::span<const RunLog> logs, double bin_width = 1.0);

TokenFrequency token_frequencies(std::span<const RunLog> logs,
                                 const std::set<std::string>& stopwords);

// ---- statistics -----------------------------------------------------------

// Unequal-variance two-sample t-test with Welch-Satterthwaite degrees of
// freedom and a two-sided p-value from the t-distribution survival function.
// Throws DegenerateSampleError for samples smaller than 2 or when both
// variances vanish.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Continued-fraction regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p for a t statistic: I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

// ---- stopwords ------------------------------------------------------------

const std::set<std::string>& default_stopwords();
std::set<std::string> load_stopwords(const std::filesystem::path& path);

}  // namespace elfarol
