#include "support/fixtures.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "elfarol/version.hpp"

namespace elfarol::testing {

FixtureBuilder::FixtureBuilder(SimConfig cfg) : cfg_(std::move(cfg)) {}

FixtureBuilder& FixtureBuilder::agent(std::vector<Position> trajectory) {
  trajectories_.push_back(std::move(trajectory));
  return *this;
}

FixtureBuilder& FixtureBuilder::message(int step, int agent_id, std::string text) {
  messages_[{step, agent_id}] = std::move(text);
  return *this;
}

FixtureBuilder& FixtureBuilder::memory(int step, int agent_id, std::string text) {
  memories_[{step, agent_id}] = std::move(text);
  return *this;
}

namespace {

Action derive_action(Position from, Position to, const GridConfig& grid) {
  for (Action a : kAllActions)
    if (apply_action(from, a, grid) == to) {
      // Prefer the literal move; Stay only when nothing moves the agent there.
      const int dx = to.x - from.x, dy = to.y - from.y;
      if (dx == 1 && a == Action::XPlus) return a;
      if (dx == -1 && a == Action::XMinus) return a;
      if (dy == 1 && a == Action::YPlus) return a;
      if (dy == -1 && a == Action::YMinus) return a;
      if (dx == 0 && dy == 0 && a == Action::Stay) return a;
    }
  throw std::logic_error("fixture trajectory is not a unit move: (" + std::to_string(from.x) +
                         "," + std::to_string(from.y) + ") -> (" + std::to_string(to.x) + "," +
                         std::to_string(to.y) + ")");
}

}  // namespace

RunLog FixtureBuilder::build() const {
  SimConfig cfg = cfg_;
  cfg.n_agents = static_cast<int>(trajectories_.size());
  if (trajectories_.empty()) throw std::logic_error("fixture needs at least one agent");
  const std::size_t length = trajectories_.front().size();
  for (const auto& t : trajectories_)
    if (t.size() != length) throw std::logic_error("fixture trajectories must share a length");
  const int steps = static_cast<int>(length) - 1;
  cfg.max_steps = steps;
  validate(cfg);

  RunLog log;
  log.manifest.schema_version = kTraceSchemaVersion;
  log.manifest.engine_version = kEngineVersion;
  log.manifest.start_time = "1970-01-01T00:00:00Z";
  log.manifest.brain_kind = "replay";
  log.manifest.config = cfg;
  for (const auto& t : trajectories_) log.manifest.initial_positions.push_back(t.front());
  log.manifest.complete = true;
  log.manifest.steps_completed = steps;

  const int threshold = cfg.threshold_count();
  for (int t = 0; t < steps; ++t) {
    int att = 0;
    for (const auto& traj : trajectories_)
      if (is_inside(traj[static_cast<std::size_t>(t)], cfg.grid)) ++att;
    const bool crowded = att >= threshold;
    for (int i = 0; i < cfg.n_agents; ++i) {
      const Position from = trajectories_[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      const Position to =
          trajectories_[static_cast<std::size_t>(i)][static_cast<std::size_t>(t) + 1];
      StepRecord rec;
      rec.step = t;
      rec.agent_id = i;
      rec.pos_before = from;
      rec.action = derive_action(from, to, cfg.grid);
      rec.pos_after = to;
      if (auto it = messages_.find({t, i}); it != messages_.end()) rec.message = it->second;
      if (auto it = memories_.find({t, i}); it != memories_.end()) rec.memory = it->second;
      rec.inside_after = is_inside(to, cfg.grid);
      rec.crowded_before = crowded;
      log.records.push_back(std::move(rec));
    }
  }
  return log;
}

std::filesystem::path FixtureBuilder::write(const std::filesystem::path& dir) const {
  const RunLog log = build();
  RunWriter writer(dir, log.manifest);
  for (const StepRecord& rec : log.records) writer.append(rec);
  writer.finalize(log.manifest.steps_completed, true);
  return dir;
}

std::vector<Position> hold(Position pos, int steps) {
  return std::vector<Position>(static_cast<std::size_t>(steps) + 1, pos);
}

RunLog planted_timing_log(int t_b, int delay, int total_steps) {
  if (t_b > total_steps || delay + 5 > t_b)
    throw std::logic_error("planted timing wants delay+5 <= t_b <= total_steps");
  SimConfig cfg;
  cfg.rng_seed = 0;
  FixtureBuilder fixture(cfg);
  for (int i = 0; i < 12; ++i) {
    std::vector<Position> traj;
    for (int t = 0; t <= total_steps; ++t)
      traj.push_back(t < t_b ? Position{19, 25} : Position{20, 25});
    fixture.agent(std::move(traj));
  }
  for (int i = 0; i < 8; ++i) {
    std::vector<Position> traj;
    for (int t = 0; t <= total_steps; ++t) {
      const int walked = std::clamp(t - delay, 0, 18);  // stop at x=31, outside the bar
      traj.push_back(Position{49 - walked, 25});
    }
    fixture.agent(std::move(traj));
  }
  return fixture.build();
}

namespace {

// In/out trajectory along x at a given bar-edge row: inside means (20, y),
// outside (19, y).
std::vector<Position> edge_track(int y, const std::vector<bool>& inside_at) {
  std::vector<Position> traj;
  traj.reserve(inside_at.size());
  for (bool inside : inside_at) traj.push_back(inside ? Position{20, y} : Position{19, y});
  return traj;
}

std::vector<bool> inside_span(int length, int enter_state, int exit_state) {
  std::vector<bool> inside(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t)
    inside[static_cast<std::size_t>(t)] = t >= enter_state && (exit_state < 0 || t < exit_state);
  return inside;
}

}  // namespace

RunLog planted_duration_log(int total_steps) {
  SimConfig cfg;
  cfg.threshold_fraction = 1.0;  // T_over when all six are inside
  cfg.rng_seed = 0;
  FixtureBuilder fixture(cfg);
  const int length = total_steps + 1;
  // stay group: entered at states 3, 1, 2 -> durations 10, 12, 11 at T_over=12
  fixture.agent(edge_track(21, inside_span(length, 3, -1)));
  fixture.agent(edge_track(22, inside_span(length, 1, -1)));
  fixture.agent(edge_track(23, inside_span(length, 2, -1)));
  // leave group: entered at 11, 10, 12 -> durations 2, 3, 1; exit at 17, 19, 15
  fixture.agent(edge_track(24, inside_span(length, 11, 17)));
  fixture.agent(edge_track(25, inside_span(length, 10, 19)));
  fixture.agent(edge_track(26, inside_span(length, 12, 15)));
  return fixture.build();
}

namespace {

std::vector<bool> in_out(std::initializer_list<int> states) {
  std::vector<bool> v;
  v.reserve(states.size());
  for (int s : states) v.push_back(s != 0);
  return v;
}

}  // namespace

RunLog exit_pattern_log_a() {
  SimConfig cfg;
  cfg.rng_seed = 0;
  FixtureBuilder fixture(cfg);
  fixture.agent(edge_track(23, in_out({1, 0, 1, 0, 1, 0})));
  fixture.agent(edge_track(24, in_out({1, 1, 1, 0, 1, 1})));
  fixture.agent(edge_track(25, in_out({1, 1, 1, 1, 1, 1})));
  fixture.agent(edge_track(26, in_out({1, 1, 1, 1, 1, 1})));
  fixture.agent(hold({0, 0}, 5));
  fixture.message(2, 4, "rally up #sync");
  return fixture.build();
}

RunLog exit_pattern_log_b() {
  SimConfig cfg;
  cfg.rng_seed = 0;
  FixtureBuilder fixture(cfg);
  fixture.agent(edge_track(23, in_out({1, 0, 0, 1, 1, 1})));
  fixture.agent(edge_track(24, in_out({1, 1, 0, 1, 1, 1})));
  fixture.agent(edge_track(25, in_out({1, 1, 1, 1, 0, 0})));
  fixture.agent(edge_track(26, in_out({1, 1, 1, 1, 1, 1})));
  fixture.agent(hold({0, 0}, 5));
  fixture.message(3, 3, "#sync again");
  return fixture.build();
}

RunLog no_hashtag_log() {
  SimConfig cfg;
  cfg.rng_seed = 0;
  FixtureBuilder fixture(cfg);
  fixture.agent(hold({1, 1}, 4));
  fixture.agent(hold({3, 1}, 4));
  fixture.agent(hold({5, 1}, 4));
  fixture.agent(hold({7, 1}, 4));
  fixture.agent(hold({9, 1}, 4));
  fixture.message(1, 0, "quiet words only");
  return fixture.build();
}

std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("elfarol_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace elfarol::testing
