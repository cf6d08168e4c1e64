#include "elfarol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace elfarol {

namespace {

// Positions/inside flags indexed by time 0..S, where time 0 is the initial
// placement and time t>0 is the state after record step t-1.
struct TraceView {
  explicit TraceView(const RunLog& log) : log_(&log) {}

  int steps() const { return log_->n_steps(); }
  int agents() const { return log_->n_agents(); }

  Position pos(int t, int agent) const {
    if (t == 0) return log_->manifest.initial_positions[static_cast<std::size_t>(agent)];
    return log_->at(t - 1, agent).pos_after;
  }
  bool inside(int t, int agent) const {
    return is_inside(pos(t, agent), log_->manifest.config.grid);
  }
  int attendance_at(int t) const {
    int count = 0;
    for (int i = 0; i < agents(); ++i)
      if (inside(t, i)) ++count;
    return count;
  }

 private:
  const RunLog* log_;
};

int required_count(double frac, int n) {
  return static_cast<int>(std::ceil(frac * n - 1e-9));
}

double euclid(double dx, double dy) { return std::hypot(dx, dy); }

// Connected components of the communication graph (same side of the bar
// boundary, within comm_radius under the configured metric). Returns the
// member ids of the largest component; ties resolve to the component whose
// smallest member id comes first.
std::vector<int> largest_component(const TraceView& view, int t, const SimConfig& cfg) {
  const int n = view.agents();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (view.inside(t, i) != view.inside(t, j)) continue;
      if (distance(view.pos(t, i), view.pos(t, j), cfg.metric) > cfg.comm_radius) continue;
      adj[static_cast<std::size_t>(i)].push_back(j);
      adj[static_cast<std::size_t>(j)].push_back(i);
    }
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<int> best;
  for (int start = 0; start < n; ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    std::vector<int> comp{start};
    seen[static_cast<std::size_t>(start)] = true;
    for (std::size_t k = 0; k < comp.size(); ++k)
      for (int next : adj[static_cast<std::size_t>(comp[k])])
        if (!seen[static_cast<std::size_t>(next)]) {
          seen[static_cast<std::size_t>(next)] = true;
          comp.push_back(next);
        }
    if (comp.size() > best.size()) best = std::move(comp);
  }
  return best;
}

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c >= 0x80;  // keep multi-byte UTF-8 sequences intact
}

bool contains_hashtag(const std::string& text) {
  for (std::size_t i = 0; i + 1 < text.size(); ++i)
    if (text[i] == '#' && is_word_byte(static_cast<unsigned char>(text[i + 1]))) return true;
  return false;
}

double sample_mean(std::span<const double> v) {
  double sum = 0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double sum = 0;
  for (double x : v) sum += (x - mean) * (x - mean);
  return sum / static_cast<double>(v.size() - 1);
}

}  // namespace

AttendanceSeries attendance_series(const RunLog& log) {
  const TraceView view(log);
  AttendanceSeries series;
  series.values.reserve(static_cast<std::size_t>(view.steps()) + 1);
  for (int t = 0; t <= view.steps(); ++t) series.values.push_back(view.attendance_at(t));
  return series;
}

std::optional<int> clustering_time(const RunLog& log, double dist, double frac,
                                   CentroidMode mode) {
  const TraceView view(log);
  const SimConfig& cfg = log.manifest.config;
  const int n = view.agents();
  const int needed = required_count(frac, n);
  for (int t = 0; t <= view.steps(); ++t) {
    double cx = 0, cy = 0;
    if (mode == CentroidMode::GlobalMean) {
      for (int i = 0; i < n; ++i) {
        cx += view.pos(t, i).x;
        cy += view.pos(t, i).y;
      }
      cx /= n;
      cy /= n;
    } else {
      const std::vector<int> comp = largest_component(view, t, cfg);
      for (int i : comp) {
        cx += view.pos(t, i).x;
        cy += view.pos(t, i).y;
      }
      cx /= static_cast<double>(comp.size());
      cy /= static_cast<double>(comp.size());
    }
    int close = 0;
    for (int i = 0; i < n; ++i)
      if (euclid(view.pos(t, i).x - cx, view.pos(t, i).y - cy) <= dist) ++close;
    if (close >= needed) return t;
  }
  return std::nullopt;
}

std::optional<int> crowding_time(const RunLog& log) {
  const TraceView view(log);
  const int threshold = log.manifest.config.threshold_count();
  for (int t = 0; t <= view.steps(); ++t)
    if (view.attendance_at(t) >= threshold) return t;
  return std::nullopt;
}

std::optional<int> delta_t(const RunLog& log, double dist, double frac, CentroidMode mode) {
  const auto t_d = clustering_time(log, dist, frac, mode);
  const auto t_b = crowding_time(log);
  if (!t_d || !t_b) return std::nullopt;
  return *t_b - *t_d;
}

TimingResult timing_result(const RunLog& log, double dist, double frac, CentroidMode mode) {
  TimingResult r;
  r.t_d = clustering_time(log, dist, frac, mode);
  r.t_b = crowding_time(log);
  if (r.t_d && r.t_b) r.delta_t = *r.t_b - *r.t_d;
  return r;
}

std::vector<std::optional<double>> exit_rate_series(const RunLog& log) {
  const TraceView view(log);
  std::vector<std::optional<double>> rates(static_cast<std::size_t>(view.steps()) + 1);
  for (int t = 1; t <= view.steps(); ++t) {
    int at_risk = 0, leavers = 0;
    for (int i = 0; i < view.agents(); ++i) {
      if (!view.inside(t - 1, i)) continue;
      ++at_risk;
      if (!view.inside(t, i)) ++leavers;
    }
    if (at_risk > 0)
      rates[static_cast<std::size_t>(t)] = static_cast<double>(leavers) / at_risk;
  }
  return rates;
}

std::optional<int> first_hashtag_step(const RunLog& log) {
  for (int t = 0; t < log.n_steps(); ++t)
    for (int i = 0; i < log.n_agents(); ++i)
      if (contains_hashtag(log.at(t, i).message)) return t;
  return std::nullopt;
}

DurationComparison duration_comparison(const RunLog& log, int horizon) {
  const auto t_over_opt = crowding_time(log);
  if (!t_over_opt)
    throw NoCrowdingError("attendance never reached the threshold; no T_over to analyze");
  const int t_over = *t_over_opt;
  const TraceView view(log);

  DurationComparison result;
  result.t_over = t_over;
  const int last_watched = std::min(view.steps(), t_over + horizon);
  for (int i = 0; i < view.agents(); ++i) {
    if (!view.inside(t_over, i)) continue;
    int duration = 0;
    for (int t = t_over; t >= 0 && view.inside(t, i); --t) ++duration;
    bool left = false;
    for (int t = t_over + 1; t <= last_watched; ++t)
      if (!view.inside(t, i)) {
        left = true;
        break;
      }
    (left ? result.leave_durations : result.stay_durations).push_back(duration);
  }
  if (result.stay_durations.size() >= 2 && result.leave_durations.size() >= 2) {
    std::vector<double> a(result.stay_durations.begin(), result.stay_durations.end());
    std::vector<double> b(result.leave_durations.begin(), result.leave_durations.end());
    const bool degenerate =
        sample_variance(a, sample_mean(a)) == 0.0 && sample_variance(b, sample_mean(b)) == 0.0;
    if (!degenerate) result.test = welch_t_test(a, b);
  }
  return result;
}

ActionTable action_table(std::span<const RunLog> logs) {
  ActionTable table;
  std::optional<int> n_agents;
  std::optional<int> threshold;
  for (const RunLog& log : logs) {
    const SimConfig& cfg = log.manifest.config;
    if (!n_agents) {
      n_agents = cfg.n_agents;
      threshold = cfg.threshold_count();
    } else if (*n_agents != cfg.n_agents || *threshold != cfg.threshold_count()) {
      throw ConfigError("action_table requires all runs to share n_agents and threshold");
    }
    for (const StepRecord& rec : log.records) {
      const bool inside_before = is_inside(rec.pos_before, cfg.grid);
      table.cell(inside_before, rec.crowded_before).counts[static_cast<int>(rec.action)] += 1;
    }
  }
  return table;
}

std::optional<DurationComparison> pooled_duration_comparison(std::span<const RunLog> logs,
                                                             int horizon) {
  DurationComparison pooled;
  bool any = false;
  for (const RunLog& log : logs) {
    try {
      DurationComparison one = duration_comparison(log, horizon);
      any = true;
      pooled.t_over = one.t_over;  // representative; per-run values differ
      pooled.stay_durations.insert(pooled.stay_durations.end(), one.stay_durations.begin(),
                                   one.stay_durations.end());
      pooled.leave_durations.insert(pooled.leave_durations.end(), one.leave_durations.begin(),
                                    one.leave_durations.end());
    } catch (const NoCrowdingError&) {
      continue;
    }
  }
  if (!any) return std::nullopt;
  if (pooled.stay_durations.size() >= 2 && pooled.leave_durations.size() >= 2) {
    std::vector<double> a(pooled.stay_durations.begin(), pooled.stay_durations.end());
    std::vector<double> b(pooled.leave_durations.begin(), pooled.leave_durations.end());
    const bool degenerate =
        sample_variance(a, sample_mean(a)) == 0.0 && sample_variance(b, sample_mean(b)) == 0.0;
    if (!degenerate) pooled.test = welch_t_test(a, b);
  }
  return pooled;
}

ExitRateProfile event_aligned_exit_rate(std::span<const RunLog> logs, int window) {
  struct Aligned {
    int event_step;
    std::vector<std::optional<double>> rates;
  };
  std::vector<Aligned> aligned;
  for (const RunLog& log : logs) {
    const auto event = first_hashtag_step(log);
    if (!event) continue;  // no hashtag: the run simply does not contribute
    aligned.push_back(Aligned{*event, exit_rate_series(log)});
  }
  if (aligned.empty()) throw NoEventError("no run contains a hashtag event");

  ExitRateProfile profile;
  profile.window = window;
  for (int offset = -window; offset <= window; ++offset) {
    std::vector<double> values;
    for (const Aligned& run : aligned) {
      const long idx = static_cast<long>(run.event_step) + offset;
      if (idx < 0 || idx >= static_cast<long>(run.rates.size())) continue;
      if (const auto& rate = run.rates[static_cast<std::size_t>(idx)]) values.push_back(*rate);
    }
    OffsetStat stat;
    stat.offset = offset;
    stat.runs_contributing = static_cast<int>(values.size());
    if (!values.empty()) {
      const double mean = sample_mean(values);
      double sq = 0;
      for (double v : values) sq += (v - mean) * (v - mean);
      stat.mean = mean;
      stat.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    }
    profile.offsets.push_back(stat);
  }
  return profile;
}

SpeedProfile speed_direction_profile(std::span<const RunLog> logs, double bin_width) {
  if (bin_width <= 0) throw ConfigError("bin_width must be positive");
  struct Acc {
    long count = 0;
    double speed_sum = 0;
    double dir_sum = 0;
  };
  std::map<std::pair<long, bool>, Acc> acc;
  for (const RunLog& log : logs) {
    const GridConfig& grid = log.manifest.config.grid;
    for (const StepRecord& rec : log.records) {
      const double before = signed_boundary_distance(rec.pos_before, grid);
      const double after = signed_boundary_distance(rec.pos_after, grid);
      const double speed = euclid(rec.pos_after.x - rec.pos_before.x,
                                  rec.pos_after.y - rec.pos_before.y);
      const long bin = static_cast<long>(std::floor(before / bin_width));
      Acc& a = acc[{bin, rec.crowded_before}];
      a.count += 1;
      a.speed_sum += speed;
      a.dir_sum += after - before;
    }
  }
  SpeedProfile profile;
  profile.bin_width = bin_width;
  for (const auto& [key, a] : acc) {
    SpeedBin bin;
    bin.lo = static_cast<double>(key.first) * bin_width;
    bin.crowded = key.second;
    bin.count = a.count;
    bin.mean_speed = a.speed_sum / static_cast<double>(a.count);
    bin.mean_direction = a.dir_sum / static_cast<double>(a.count);
    profile.bins.push_back(bin);
  }
  return profile;
}

TokenFrequency token_frequencies(std::span<const RunLog> logs,
                                 const std::set<std::string>& stopwords) {
  TokenFrequency freq;
  for (const RunLog& log : logs) {
    for (const StepRecord& rec : log.records) {
      const std::string& text = rec.message;
      std::string token;
      auto flush = [&] {
        if (token.empty()) return;
        if (stopwords.find(token) == stopwords.end()) {
          freq.counts[token] += 1;
          freq.total += 1;
        }
        token.clear();
      };
      for (char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (is_word_byte(c)) {
          token.push_back(
              (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : raw);
        } else {
          flush();
        }
      }
      flush();
    }
  }
  return freq;
}

std::optional<int> TokenFrequency::rank_of(const std::string& token) const {
  const auto it = counts.find(token);
  if (it == counts.end()) return std::nullopt;
  int rank = 1;
  for (const auto& [other, count] : counts) {
    if (count > it->second || (count == it->second && other < token)) ++rank;
  }
  return rank;
}

std::optional<double> TokenFrequency::relative_frequency(const std::string& token) const {
  const auto it = counts.find(token);
  if (it == counts.end() || total == 0) return std::nullopt;
  return static_cast<double>(it->second) / static_cast<double>(total);
}

// ---- statistics -----------------------------------------------------------

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (t == 0.0) return 1.0;
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw DegenerateSampleError("welch_t_test requires at least two values per sample");
  const double mean_a = sample_mean(a);
  const double mean_b = sample_mean(b);
  const double var_a = sample_variance(a, mean_a);
  const double var_b = sample_variance(b, mean_b);
  if (var_a == 0.0 && var_b == 0.0)
    throw DegenerateSampleError("welch_t_test requires nonzero variance in at least one sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double se2 = var_a / na + var_b / nb;
  WelchResult result;
  result.t = (mean_a - mean_b) / std::sqrt(se2);
  result.df = se2 * se2 /
              ((var_a / na) * (var_a / na) / (na - 1.0) + (var_b / nb) * (var_b / nb) / (nb - 1.0));
  result.p = student_t_two_sided_p(result.t, result.df);
  return result;
}

// ---- stopwords ------------------------------------------------------------

namespace {

// The usual short English list.
constexpr const char* kStopwords[] = {
    "a",       "about",   "above",  "after",   "again",   "against", "all",     "am",
    "an",      "and",     "any",    "are",     "as",      "at",      "be",      "because",
    "been",    "before",  "being",  "below",   "between", "both",    "but",     "by",
    "can",     "cannot",  "could",  "did",     "do",      "does",    "doing",   "down",
    "during",  "each",    "few",    "for",     "from",    "further", "had",     "has",
    "have",    "having",  "he",     "her",     "here",    "hers",    "herself", "him",
    "himself", "his",     "how",    "i",       "if",      "in",      "into",    "is",
    "it",      "its",     "itself", "let",     "me",      "more",    "most",    "my",
    "myself",  "no",      "nor",    "not",     "of",      "off",     "on",      "once",
    "only",    "or",      "other",  "ought",   "our",     "ours",    "ourselves",
    "out",     "over",    "own",    "s",       "same",    "she",     "should",  "so",
    "some",    "such",    "t",      "than",    "that",    "the",     "their",   "theirs",
    "them",    "themselves",        "then",    "there",   "these",   "they",    "this",
    "those",   "through", "to",     "too",     "under",   "until",   "up",      "very",
    "was",     "we",      "were",   "what",    "when",    "where",   "which",   "while",
    "who",     "whom",    "why",    "with",    "would",   "you",     "your",    "yours",
    "yourself",           "yourselves"};

}  // namespace

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words(std::begin(kStopwords), std::end(kStopwords));
  return words;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read stopword file: " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string word;
    for (char c : line) {
      const auto u = static_cast<unsigned char>(c);
      if (std::isspace(u)) break;
      word.push_back((u >= 'A' && u <= 'Z') ? static_cast<char>(u - 'A' + 'a') : c);
    }
    if (!word.empty() && word.front() != '#') words.insert(word);
  }
  return words;
}

}  // namespace elfarol
