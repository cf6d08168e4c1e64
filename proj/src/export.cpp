#include "elfarol/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "elfarol/csv.hpp"

namespace elfarol {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string px(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// ---- svg ------------------------------------------------------------------

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 62, kRight = 18, kTop = 34, kBottom = 46;

constexpr const char* kPalette[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4",
                                    "#8c613c", "#dc7ec0", "#797979", "#d5bb67", "#82c6e2"};

struct NiceTicks {
  double lo, hi, step;
};

NiceTicks nice_ticks(double lo, double hi) {
  if (hi <= lo) {
    hi = lo + 1;
  }
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  return NiceTicks{std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label, double x0, double x1,
           double y0, double y1)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {
    const NiceTicks xt = nice_ticks(x0, x1);
    const NiceTicks yt = nice_ticks(y0, y1);
    x0_ = xt.lo;
    x1_ = xt.hi;
    xstep_ = xt.step;
    y0_ = yt.lo;
    y1_ = yt.hi;
    ystep_ = yt.step;
  }

  double sx(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double sy(double y) const {
    return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                double width, bool dashed = false) {
    if (pts.empty()) return;
    body_ += "  <polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + px(width) +
             "\"";
    if (dashed) body_ += " stroke-dasharray=\"6 4\"";
    body_ += " points=\"";
    for (const auto& [x, y] : pts) body_ += px(sx(x)) + "," + px(sy(y)) + " ";
    body_ += "\"/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill,
               double opacity) {
    if (pts.empty()) return;
    body_ += "  <polygon fill=\"" + fill + "\" fill-opacity=\"" + px(opacity) +
             "\" stroke=\"none\" points=\"";
    for (const auto& [x, y] : pts) body_ += px(sx(x)) + "," + px(sy(y)) + " ";
    body_ += "\"/>\n";
  }

  void bar(double x_lo, double x_hi, double value, const std::string& fill) {
    const double top = sy(value), bottom = sy(std::max(y0_, 0.0));
    body_ += "  <rect x=\"" + px(sx(x_lo)) + "\" y=\"" + px(std::min(top, bottom)) + "\" width=\"" +
             px(sx(x_hi) - sx(x_lo)) + "\" height=\"" + px(std::fabs(bottom - top)) +
             "\" fill=\"" + fill + "\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n";
  }

  void vline(double x, const std::string& color, bool dashed = true) {
    body_ += "  <line x1=\"" + px(sx(x)) + "\" y1=\"" + px(sy(y0_)) + "\" x2=\"" + px(sx(x)) +
             "\" y2=\"" + px(sy(y1_)) + "\" stroke=\"" + color + "\" stroke-width=\"1\"" +
             (dashed ? " stroke-dasharray=\"4 4\"" : "") + "/>\n";
  }

  void hline(double y, const std::string& color, bool dashed = true) {
    body_ += "  <line x1=\"" + px(sx(x0_)) + "\" y1=\"" + px(sy(y)) + "\" x2=\"" + px(sx(x1_)) +
             "\" y2=\"" + px(sy(y)) + "\" stroke=\"" + color + "\" stroke-width=\"1\"" +
             (dashed ? " stroke-dasharray=\"4 4\"" : "") + "/>\n";
  }

  void circle(double x, double y, double r, const std::string& fill) {
    body_ += "  <circle cx=\"" + px(sx(x)) + "\" cy=\"" + px(sy(y)) + "\" r=\"" + px(r) +
             "\" fill=\"" + fill + "\"/>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = kTop + 6;
    for (const auto& [label, color] : entries) {
      body_ += "  <rect x=\"" + px(kWidth - kRight - 150) + "\" y=\"" + px(y - 8) +
               "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
      body_ += "  <text x=\"" + px(kWidth - kRight - 133) + "\" y=\"" + px(y + 2) +
               "\" font-size=\"11\" font-family=\"sans-serif\">" + label + "</text>\n";
      y += 16;
    }
  }

  std::string finish() const {
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" +
           px(kHeight) + "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) + "\">\n";
    out += "  <rect x=\"0\" y=\"0\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) +
           "\" fill=\"#ffffff\"/>\n";
    out += "  <text x=\"" + px(kWidth / 2) +
           "\" y=\"20\" font-size=\"14\" font-family=\"sans-serif\" text-anchor=\"middle\">" +
           title_ + "</text>\n";
    // axes
    out += "  <line x1=\"" + px(kLeft) + "\" y1=\"" + px(kHeight - kBottom) + "\" x2=\"" +
           px(kWidth - kRight) + "\" y2=\"" + px(kHeight - kBottom) +
           "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    out += "  <line x1=\"" + px(kLeft) + "\" y1=\"" + px(kTop) + "\" x2=\"" + px(kLeft) +
           "\" y2=\"" + px(kHeight - kBottom) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    for (double x = x0_; x <= x1_ + xstep_ / 2; x += xstep_) {
      out += "  <line x1=\"" + px(sx(x)) + "\" y1=\"" + px(kHeight - kBottom) + "\" x2=\"" +
             px(sx(x)) + "\" y2=\"" + px(kHeight - kBottom + 4) +
             "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
      out += "  <text x=\"" + px(sx(x)) + "\" y=\"" + px(kHeight - kBottom + 16) +
             "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\">" + num(x) +
             "</text>\n";
    }
    for (double y = y0_; y <= y1_ + ystep_ / 2; y += ystep_) {
      out += "  <line x1=\"" + px(kLeft - 4) + "\" y1=\"" + px(sy(y)) + "\" x2=\"" + px(kLeft) +
             "\" y2=\"" + px(sy(y)) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
      out += "  <text x=\"" + px(kLeft - 7) + "\" y=\"" + px(sy(y) + 3) +
             "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"end\">" + num(y) +
             "</text>\n";
    }
    out += "  <text x=\"" + px((kLeft + kWidth - kRight) / 2) + "\" y=\"" + px(kHeight - 8) +
           "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\">" + x_label_ +
           "</text>\n";
    out += "  <text x=\"14\" y=\"" + px((kTop + kHeight - kBottom) / 2) +
           "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 14 " +
           px((kTop + kHeight - kBottom) / 2) + ")\">" + y_label_ + "</text>\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

 private:
  std::string title_, x_label_, y_label_;
  double x0_, x1_, xstep_, y0_, y1_, ystep_;
  std::string body_;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string direction_color(double direction) {
  // -1 (inward) maps to blue, +1 (outward) to red.
  const double t = std::clamp((direction + 1.0) / 2.0, 0.0, 1.0);
  const auto lerp = [t](int a, int b) { return static_cast<int>(std::lround(a + t * (b - a))); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", lerp(0x21, 0xb2), lerp(0x66, 0x18),
                lerp(0xac, 0x2c));
  return buf;
}

std::vector<std::optional<double>> mean_attendance(const AnalysisReport& report) {
  std::size_t longest = 0;
  for (const AttendanceSeries& s : report.attendance) longest = std::max(longest, s.values.size());
  std::vector<std::optional<double>> mean(longest);
  for (std::size_t t = 0; t < longest; ++t) {
    double sum = 0;
    int n = 0;
    for (const AttendanceSeries& s : report.attendance)
      if (t < s.values.size()) {
        sum += s.values[t];
        ++n;
      }
    if (n > 0) mean[t] = sum / n;
  }
  return mean;
}

std::vector<int> collect_delta_ts(const AnalysisReport& report) {
  std::vector<int> out;
  for (const TimingResult& t : report.timing)
    if (t.delta_t) out.push_back(*t.delta_t);
  return out;
}

const char* location_name(bool inside) { return inside ? "inside" : "outside"; }
const char* crowding_name(bool crowded) { return crowded ? "crowded" : "not_crowded"; }

// ---- csv tables -------------------------------------------------------------

void write_timing_csv(const AnalysisReport& r, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>{"run", "t_d", "t_b", "delta_t"});
  for (std::size_t i = 0; i < r.run_ids.size(); ++i) {
    const TimingResult& t = r.timing[i];
    csv::write_row(out, std::vector<std::string>{
                            r.run_ids[i], t.t_d ? std::to_string(*t.t_d) : "",
                            t.t_b ? std::to_string(*t.t_b) : "",
                            t.delta_t ? std::to_string(*t.delta_t) : ""});
  }
}

void write_histogram_csv(const std::vector<HistogramBin>& bins, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>{"bin_lo", "bin_hi", "count"});
  for (const HistogramBin& b : bins)
    csv::write_row(out,
                   std::vector<std::string>{num(b.lo), num(b.hi), std::to_string(b.count)});
}

void write_attendance_csv(const AnalysisReport& r, std::ostream& out) {
  std::vector<std::string> header{"step"};
  header.insert(header.end(), r.run_ids.begin(), r.run_ids.end());
  header.push_back("mean");
  csv::write_row(out, header);
  const auto mean = mean_attendance(r);
  for (std::size_t t = 0; t < mean.size(); ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (const AttendanceSeries& s : r.attendance)
      row.push_back(t < s.values.size() ? std::to_string(s.values[t]) : "");
    row.push_back(mean[t] ? num(*mean[t]) : "");
    csv::write_row(out, row);
  }
}

void write_action_table_csv(const AnalysisReport& r, std::ostream& out) {
  csv::write_row(out,
                 std::vector<std::string>{"location", "crowding", "action", "count", "frequency"});
  for (bool inside : {false, true})
    for (bool crowded : {false, true}) {
      const ActionCell& cell = r.actions.cell(inside, crowded);
      for (Action a : kAllActions) {
        const auto freq = cell.frequency(a);
        csv::write_row(out, std::vector<std::string>{
                                location_name(inside), crowding_name(crowded),
                                std::string(action_token(a)),
                                std::to_string(cell.counts[static_cast<int>(a)]),
                                freq ? num(*freq) : ""});
      }
    }
}

void write_action_summary_csv(const AnalysisReport& r, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>{"location", "crowding", "records", "stay_rate",
                                               "move_rate"});
  for (bool inside : {false, true})
    for (bool crowded : {false, true}) {
      const ActionCell& cell = r.actions.cell(inside, crowded);
      const auto stay = cell.stay_rate();
      const auto move = cell.move_rate();
      csv::write_row(out, std::vector<std::string>{location_name(inside), crowding_name(crowded),
                                                   std::to_string(cell.total()),
                                                   stay ? num(*stay) : "",
                                                   move ? num(*move) : ""});
    }
}

void write_durations_csv(const AnalysisReport& r, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>{"group", "duration"});
  if (!r.durations) return;
  for (int d : r.durations->stay_durations)
    csv::write_row(out, std::vector<std::string>{"stay", std::to_string(d)});
  for (int d : r.durations->leave_durations)
    csv::write_row(out, std::vector<std::string>{"leave", std::to_string(d)});
}

void write_duration_stats_csv(const AnalysisReport& r, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>{"n_stay", "n_leave", "mean_stay", "mean_leave",
                                               "t", "df", "p"});
  if (!r.durations) return;
  const DurationComparison& d = *r.durations;
  auto mean_of = [](const std::vector<int>& v) -> std::string {
    if (v.empty()) return "";
    double sum = 0;
    for (int x : v) sum += x;
    return num(sum / static_cast<double>(v.size()));
  };
  csv::write_row(out, std::vector<std::string>{
                          std::to_string(d.stay_durations.size()),
                          std::to_string(d.leave_durations.size()), mean_of(d.stay_durations),
                          mean_of(d.leave_durations), d.test ? num(d.test->t) : "",
                          d.test ? num(d.test->df) : "", d.test ? num(d.test->p) : ""});
}

void write_exit_rate_csv(const AnalysisReport& r, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>{"offset", "mean", "std", "runs"});
  if (!r.exit_profile) return;
  for (const OffsetStat& s : r.exit_profile->offsets)
    csv::write_row(out, std::vector<std::string>{std::to_string(s.offset),
                                                 s.mean ? num(*s.mean) : "",
                                                 s.stddev ? num(*s.stddev) : "",
                                                 std::to_string(s.runs_contributing)});
}

void write_speed_csv(const AnalysisReport& r, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>{"bin_lo", "bin_hi", "crowded", "count",
                                               "mean_speed", "mean_direction"});
  for (const SpeedBin& b : r.speed.bins)
    csv::write_row(out, std::vector<std::string>{
                            num(b.lo), num(b.lo + r.speed.bin_width), b.crowded ? "true" : "false",
                            std::to_string(b.count), num(b.mean_speed), num(b.mean_direction)});
}

void write_tokens_csv(const TokenFrequency& tokens, std::ostream& out) {
  csv::write_row(out, std::vector<std::string>{"token", "count", "relative_frequency"});
  std::vector<std::pair<std::string, long>> sorted(tokens.counts.begin(), tokens.counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [token, count] : sorted)
    csv::write_row(out, std::vector<std::string>{
                            token, std::to_string(count),
                            tokens.total > 0
                                ? num(static_cast<double>(count) / static_cast<double>(tokens.total))
                                : ""});
}

// ---- charts -----------------------------------------------------------------

std::string delta_t_histogram_svg(const std::vector<HistogramBin>& bins) {
  double lo = 0, hi = 1, max_count = 1;
  if (!bins.empty()) {
    lo = bins.front().lo;
    hi = bins.back().hi;
    max_count = 0;
    for (const HistogramBin& b : bins) max_count = std::max(max_count, double(b.count));
  }
  SvgChart chart("Clustering-to-crowding lag", "delta_t (steps)", "runs", lo, hi, 0, max_count);
  for (const HistogramBin& b : bins) chart.bar(b.lo, b.hi, double(b.count), "#4878d0");
  return chart.finish();
}

std::string attendance_svg(const AnalysisReport& r) {
  const auto mean = mean_attendance(r);
  const double steps = mean.empty() ? 1.0 : double(mean.size() - 1);
  SvgChart chart("Bar attendance", "step", "agents inside", 0, std::max(steps, 1.0), 0,
                 std::max(r.n_agents, 1));
  for (std::size_t i = 0; i < r.attendance.size(); ++i) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t t = 0; t < r.attendance[i].values.size(); ++t)
      pts.emplace_back(double(t), double(r.attendance[i].values[t]));
    chart.polyline(pts, kPalette[i % std::size(kPalette)], 0.8);
  }
  std::vector<std::pair<double, double>> mean_pts;
  for (std::size_t t = 0; t < mean.size(); ++t)
    if (mean[t]) mean_pts.emplace_back(double(t), *mean[t]);
  chart.polyline(mean_pts, "#1f3b73", 2.5);
  chart.hline(r.threshold_count, "#000000");
  chart.hline(r.n_agents, "#4878d0");
  return chart.finish();
}

std::string exit_rate_svg(const AnalysisReport& r) {
  SvgChart chart("Exit rate around first hashtag", "offset from first hashtag (steps)",
                 "exit rate",
                 r.exit_profile ? -double(r.exit_profile->window) : 0.0,
                 r.exit_profile ? double(r.exit_profile->window) : 1.0, 0, 1);
  if (r.exit_profile) {
    std::vector<std::pair<double, double>> upper, lower, mean_pts;
    for (const OffsetStat& s : r.exit_profile->offsets) {
      if (!s.mean) continue;
      const double sd = s.stddev.value_or(0.0);
      mean_pts.emplace_back(s.offset, *s.mean);
      upper.emplace_back(s.offset, std::min(1.0, *s.mean + sd));
      lower.emplace_back(s.offset, std::max(0.0, *s.mean - sd));
    }
    std::vector<std::pair<double, double>> band = upper;
    band.insert(band.end(), lower.rbegin(), lower.rend());
    chart.polygon(band, "#4878d0", 0.25);
    chart.polyline(mean_pts, "#1f3b73", 2.0);
    chart.vline(0, "#d65f5f");
  }
  return chart.finish();
}

std::string speed_profile_svg(const AnalysisReport& r) {
  double lo = -1, hi = 1, top = 1;
  if (!r.speed.bins.empty()) {
    lo = r.speed.bins.front().lo;
    hi = r.speed.bins.back().lo + r.speed.bin_width;
    top = 0;
    for (const SpeedBin& b : r.speed.bins) top = std::max(top, b.mean_speed);
    top = std::max(top, 0.1);
  }
  SvgChart chart("Movement near the bar boundary", "signed distance from boundary", "mean speed",
                 lo, hi, 0, top);
  chart.vline(0, "#797979");
  for (bool crowded : {false, true}) {
    std::vector<std::pair<double, double>> pts;
    for (const SpeedBin& b : r.speed.bins)
      if (b.crowded == crowded)
        pts.emplace_back(b.lo + r.speed.bin_width / 2, b.mean_speed);
    chart.polyline(pts, crowded ? "#b2182c" : "#2166ac", 1.8, crowded);
    for (const SpeedBin& b : r.speed.bins)
      if (b.crowded == crowded)
        chart.circle(b.lo + r.speed.bin_width / 2, b.mean_speed, 3.5,
                     direction_color(b.mean_direction));
  }
  chart.legend({{"crowded (dashed)", "#b2182c"},
                {"not crowded", "#2166ac"},
                {"marker: direction", "#b2182c"}});
  return chart.finish();
}

}  // namespace

std::vector<HistogramBin> histogram(std::span<const int> values, double bin_width) {
  std::vector<HistogramBin> bins;
  if (values.empty()) return bins;
  if (bin_width <= 0) throw ConfigError("histogram bin width must be positive");
  long lo_bin = std::numeric_limits<long>::max(), hi_bin = std::numeric_limits<long>::min();
  for (int v : values) {
    const long b = static_cast<long>(std::floor(v / bin_width));
    lo_bin = std::min(lo_bin, b);
    hi_bin = std::max(hi_bin, b);
  }
  for (long b = lo_bin; b <= hi_bin; ++b)
    bins.push_back(HistogramBin{b * bin_width, (b + 1) * bin_width, 0});
  for (int v : values) {
    const long b = static_cast<long>(std::floor(v / bin_width));
    bins[static_cast<std::size_t>(b - lo_bin)].count += 1;
  }
  return bins;
}

AnalysisReport analyze_runs(std::span<const RunLog> logs, std::vector<std::string> run_ids,
                            const AnalyzeOptions& options) {
  if (logs.empty()) throw DataError("no runs to analyze");
  if (run_ids.size() != logs.size()) throw ConfigError("run id count must match run count");

  AnalysisReport report;
  report.run_ids = std::move(run_ids);
  report.options = options;
  report.n_agents = logs.front().manifest.config.n_agents;
  report.threshold_count = logs.front().manifest.config.threshold_count();

  for (const RunLog& log : logs) {
    report.timing.push_back(timing_result(log, options.cluster_dist, options.cluster_frac,
                                          options.centroid_mode));
    report.attendance.push_back(attendance_series(log));
  }
  report.actions = action_table(logs);
  report.durations = pooled_duration_comparison(logs, options.duration_horizon);
  try {
    report.exit_profile = event_aligned_exit_rate(logs, options.window);
  } catch (const NoEventError&) {
    report.exit_profile = std::nullopt;
  }
  report.speed = speed_direction_profile(logs, options.speed_bin_width);
  report.tokens = token_frequencies(logs, options.stopwords);
  return report;
}

std::vector<std::filesystem::path> export_report(const AnalysisReport& report,
                                                 const std::filesystem::path& out_dir,
                                                 ExportFormat format) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = out_dir / name;
    write_text(path, text);
    files.push_back(path);
  };
  const bool csv_on = format != ExportFormat::Svg;
  const bool svg_on = format != ExportFormat::Csv;

  const std::vector<int> delta_ts = collect_delta_ts(report);
  const std::vector<HistogramBin> delta_bins =
      histogram(delta_ts, report.options.delta_t_bin_width);

  if (csv_on) {
    std::ostringstream timing, hist, att, actions, summary, durations, stats, exits, speed, tokens;
    write_timing_csv(report, timing);
    write_histogram_csv(delta_bins, hist);
    write_attendance_csv(report, att);
    write_action_table_csv(report, actions);
    write_action_summary_csv(report, summary);
    write_durations_csv(report, durations);
    write_duration_stats_csv(report, stats);
    write_exit_rate_csv(report, exits);
    write_speed_csv(report, speed);
    write_tokens_csv(report.tokens, tokens);
    emit("timing.csv", timing.str());
    emit("delta_t_histogram.csv", hist.str());
    emit("attendance.csv", att.str());
    emit("action_table.csv", actions.str());
    emit("action_summary.csv", summary.str());
    emit("durations.csv", durations.str());
    emit("duration_stats.csv", stats.str());
    emit("exit_rate_aligned.csv", exits.str());
    emit("speed_profile.csv", speed.str());
    emit("tokens.csv", tokens.str());
  }
  if (svg_on) {
    emit("delta_t_histogram.svg", delta_t_histogram_svg(delta_bins));
    emit("attendance.svg", attendance_svg(report));
    emit("exit_rate_aligned.svg", exit_rate_svg(report));
    emit("speed_profile.svg", speed_profile_svg(report));
  }
  return files;
}

std::filesystem::path export_messages(std::span<const RunLog> logs,
                                      std::span<const std::string> run_ids,
                                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "messages.jsonl";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    for (const StepRecord& rec : logs[i].records) {
      nlohmann::json j;
      j["run"] = run_ids[i];
      j["step"] = rec.step;
      j["agent_id"] = rec.agent_id;
      j["message"] = rec.message;
      j["memory"] = rec.memory;
      out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
  }
  return path;
}

std::vector<std::filesystem::path> export_compare(const CompareReport& compare,
                                                  const std::filesystem::path& out_dir,
                                                  ExportFormat format) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> files;
  auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = out_dir / name;
    write_text(path, text);
    files.push_back(path);
  };
  const bool csv_on = format != ExportFormat::Svg;
  const bool svg_on = format != ExportFormat::Csv;

  const std::vector<int> da = collect_delta_ts(compare.a);
  const std::vector<int> db = collect_delta_ts(compare.b);
  const double width = compare.a.options.delta_t_bin_width;
  // Shared binning so the two columns align.
  std::vector<int> all = da;
  all.insert(all.end(), db.begin(), db.end());
  const std::vector<HistogramBin> frame = histogram(all, width);
  auto count_in = [&](const std::vector<int>& values, const HistogramBin& bin) {
    long count = 0;
    for (int v : values)
      if (v >= bin.lo && v < bin.hi) ++count;
    return count;
  };

  if (csv_on) {
    std::ostringstream out;
    csv::write_row(out, std::vector<std::string>{"bin_lo", "bin_hi", compare.label_a,
                                                 compare.label_b});
    for (const HistogramBin& bin : frame)
      csv::write_row(out, std::vector<std::string>{num(bin.lo), num(bin.hi),
                                                   std::to_string(count_in(da, bin)),
                                                   std::to_string(count_in(db, bin))});
    emit("compare_delta_t.csv", out.str());

    std::ostringstream tok;
    csv::write_row(tok, std::vector<std::string>{"token", "rank_" + compare.label_a,
                                                 "relative_frequency_" + compare.label_a,
                                                 "rank_" + compare.label_b,
                                                 "relative_frequency_" + compare.label_b});
    for (const std::string& token : compare.query_tokens) {
      const auto ra = compare.a.tokens.rank_of(token);
      const auto fa = compare.a.tokens.relative_frequency(token);
      const auto rb = compare.b.tokens.rank_of(token);
      const auto fb = compare.b.tokens.relative_frequency(token);
      csv::write_row(tok, std::vector<std::string>{token, ra ? std::to_string(*ra) : "",
                                                   fa ? num(*fa) : "",
                                                   rb ? std::to_string(*rb) : "",
                                                   fb ? num(*fb) : ""});
    }
    emit("compare_tokens.csv", tok.str());
  }

  if (svg_on) {
    double lo = 0, hi = 1, top = 1;
    if (!frame.empty()) {
      lo = frame.front().lo;
      hi = frame.back().hi;
      top = 0;
      for (const HistogramBin& bin : frame)
        top = std::max({top, double(count_in(da, bin)), double(count_in(db, bin))});
      top = std::max(top, 1.0);
    }
    SvgChart chart("Clustering-to-crowding lag by scenario", "delta_t (steps)", "runs", lo, hi, 0,
                   top);
    for (const HistogramBin& bin : frame) {
      const double mid = (bin.lo + bin.hi) / 2;
      chart.bar(bin.lo, mid, double(count_in(da, bin)), "#4878d0");
      chart.bar(mid, bin.hi, double(count_in(db, bin)), "#9b9b9b");
    }
    chart.legend({{compare.label_a, "#4878d0"}, {compare.label_b, "#9b9b9b"}});
    emit("compare_delta_t.svg", chart.finish());

    const auto mean_a = mean_attendance(compare.a);
    const auto mean_b = mean_attendance(compare.b);
    const double steps = std::max(mean_a.size(), mean_b.size());
    SvgChart att("Mean attendance by scenario", "step", "agents inside", 0,
                 std::max(steps - 1, 1.0), 0, std::max(compare.a.n_agents, compare.b.n_agents));
    auto to_pts = [](const std::vector<std::optional<double>>& mean) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t t = 0; t < mean.size(); ++t)
        if (mean[t]) pts.emplace_back(double(t), *mean[t]);
      return pts;
    };
    att.polyline(to_pts(mean_a), "#4878d0", 2.0);
    att.polyline(to_pts(mean_b), "#9b9b9b", 2.0);
    att.hline(compare.a.threshold_count, "#000000");
    att.legend({{compare.label_a, "#4878d0"}, {compare.label_b, "#9b9b9b"}});
    emit("compare_attendance.svg", att.finish());
  }
  return files;
}

}  // namespace elfarol
