#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "elfarol/analysis.hpp"
#include "elfarol/recorder.hpp"

namespace elfarol {

enum class ExportFormat { Csv, Svg, Both };

struct AnalyzeOptions {
  int window = 30;              // event-aligned exit-rate half width
  double speed_bin_width = 1.0;
  double delta_t_bin_width = 50.0;
  double cluster_dist = 10.0;
  double cluster_frac = 0.6;
  CentroidMode centroid_mode = CentroidMode::GlobalMean;
  int duration_horizon = 50;
  std::set<std::string> stopwords = default_stopwords();
};

// Everything the report files are rendered from. Sections that depend on an
// event that never happened (no crowding step, no hashtag) are absent rather
// than failing the whole report.
struct AnalysisReport {
  std::vector<std::string> run_ids;
  std::vector<TimingResult> timing;           // aligned with run_ids
  std::vector<AttendanceSeries> attendance;   // aligned with run_ids
  ActionTable actions;
  std::optional<DurationComparison> durations;  // pooled across runs
  std::optional<ExitRateProfile> exit_profile;
  SpeedProfile speed;
  TokenFrequency tokens;
  int n_agents = 0;
  int threshold_count = 0;
  AnalyzeOptions options;
};

AnalysisReport analyze_runs(std::span<const RunLog> logs, std::vector<std::string> run_ids,
                            const AnalyzeOptions& options);

// Writes the CSV tables and/or SVG charts into out_dir and returns the file
// list. Pure function of the report: repeated exports are byte-identical.
std::vector<std::filesystem::path> export_report(const AnalysisReport& report,
                                                 const std::filesystem::path& out_dir,
                                                 ExportFormat format);

// messages.jsonl: one line per (run, step, agent) with the raw message and
// memory text, for external embedding/clustering tools.
std::filesystem::path export_messages(std::span<const RunLog> logs,
                                      std::span<const std::string> run_ids,
                                      const std::filesystem::path& out_dir);

struct CompareReport {
  std::string label_a;
  std::string label_b;
  AnalysisReport a;
  AnalysisReport b;
  std::vector<std::string> query_tokens;  // tokens to rank per scenario
};

std::vector<std::filesystem::path> export_compare(const CompareReport& compare,
                                                  const std::filesystem::path& out_dir,
                                                  ExportFormat format);

// Shared by the report and its tests: histogram of delta-t values with bins
// [k*w, (k+1)*w) covering the value range; empty input yields no bins.
struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  long count = 0;
};
std::vector<HistogramBin> histogram(std::span<const int> values, double bin_width);

}  // namespace elfarol
