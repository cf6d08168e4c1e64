#include "elfarol/world.hpp"

#include <algorithm>
#include <cmath>

#include "elfarol/rng.hpp"

namespace elfarol {

std::string_view action_token(Action a) {
  switch (a) {
    case Action::XPlus: return "x+1";
    case Action::XMinus: return "x-1";
    case Action::YPlus: return "y+1";
    case Action::YMinus: return "y-1";
    case Action::Stay: return "stay";
  }
  return "stay";
}

std::optional<Action> action_from_token(std::string_view token) {
  if (token == "x+1") return Action::XPlus;
  if (token == "x-1") return Action::XMinus;
  if (token == "y+1") return Action::YPlus;
  if (token == "y-1") return Action::YMinus;
  if (token == "stay") return Action::Stay;
  return std::nullopt;
}

std::string_view brain_kind_name(BrainSpec::Kind k) {
  switch (k) {
    case BrainSpec::Kind::Llm: return "llm";
    case BrainSpec::Kind::GreedyToBar: return "greedy";
    case BrainSpec::Kind::ThresholdResponder: return "threshold";
    case BrainSpec::Kind::RandomWalk: return "random";
    case BrainSpec::Kind::Replay: return "replay";
  }
  return "random";
}

std::optional<BrainSpec::Kind> brain_kind_from_name(std::string_view name) {
  if (name == "llm") return BrainSpec::Kind::Llm;
  if (name == "greedy") return BrainSpec::Kind::GreedyToBar;
  if (name == "threshold") return BrainSpec::Kind::ThresholdResponder;
  if (name == "random") return BrainSpec::Kind::RandomWalk;
  if (name == "replay") return BrainSpec::Kind::Replay;
  return std::nullopt;
}

int SimConfig::threshold_count() const {
  // The epsilon absorbs cases like 0.6*20 evaluating to 12.000000000000002.
  return static_cast<int>(std::ceil(threshold_fraction * n_agents - 1e-9));
}

void validate(const SimConfig& cfg) {
  const GridConfig& g = cfg.grid;
  if (g.width < 1 || g.height < 1) throw ConfigError("grid dimensions must be >= 1");
  if (g.bar_size < 1) throw ConfigError("bar_size must be >= 1");
  if (g.bar_min.x < 0 || g.bar_min.y < 0 || g.bar_max_x() >= g.width || g.bar_max_y() >= g.height)
    throw ConfigError("bar rectangle must be fully contained in the grid");
  if (cfg.n_agents < 1) throw ConfigError("n_agents must be >= 1");
  if (!(cfg.threshold_fraction > 0.0 && cfg.threshold_fraction <= 1.0))
    throw ConfigError("threshold_fraction must be in (0,1]");
  if (cfg.comm_radius < 0) throw ConfigError("comm_radius must be >= 0");
  if (cfg.max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (cfg.venue_name.empty()) throw ConfigError("venue_name must not be empty");
  if (cfg.brain.kind == BrainSpec::Kind::Replay && cfg.brain.replay_source.empty())
    throw ConfigError("replay brain requires a source run directory");
  if (cfg.exclude_bar_at_init &&
      static_cast<long>(g.width) * g.height == static_cast<long>(g.bar_size) * g.bar_size)
    throw ConfigError("exclude_bar_at_init leaves no cells to place agents on");
}

bool is_inside(Position pos, const GridConfig& grid) {
  return pos.x >= grid.bar_min.x && pos.x <= grid.bar_max_x() && pos.y >= grid.bar_min.y &&
         pos.y <= grid.bar_max_y();
}

Position apply_action(Position pos, Action a, const GridConfig& grid) {
  Position next = pos;
  switch (a) {
    case Action::XPlus: next.x += 1; break;
    case Action::XMinus: next.x -= 1; break;
    case Action::YPlus: next.y += 1; break;
    case Action::YMinus: next.y -= 1; break;
    case Action::Stay: break;
  }
  next.x = std::clamp(next.x, 0, grid.width - 1);
  next.y = std::clamp(next.y, 0, grid.height - 1);
  return next;
}

int attendance(const WorldState& world) {
  const GridConfig& grid = world.config->grid;
  int count = 0;
  for (const AgentState& a : world.agents)
    if (is_inside(a.pos, grid)) ++count;
  return count;
}

bool is_crowded(const WorldState& world) {
  return attendance(world) >= world.config->threshold_count();
}

double distance(Position a, Position b, DistanceMetric metric) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  if (metric == DistanceMetric::Chebyshev) return std::max(std::abs(dx), std::abs(dy));
  return std::hypot(dx, dy);
}

std::vector<int> neighbors(const WorldState& world, int agent_id) {
  const SimConfig& cfg = *world.config;
  const Position self = world.agents.at(static_cast<std::size_t>(agent_id)).pos;
  const bool self_inside = is_inside(self, cfg.grid);
  std::vector<int> out;
  for (const AgentState& other : world.agents) {
    if (other.id == agent_id) continue;
    if (is_inside(other.pos, cfg.grid) != self_inside) continue;
    if (distance(self, other.pos, cfg.metric) <= cfg.comm_radius) out.push_back(other.id);
  }
  return out;
}

WorldState step(const WorldState& world, std::span<const AgentOutput> decisions) {
  if (decisions.size() != world.agents.size())
    throw ConfigError("decision list length " + std::to_string(decisions.size()) +
                      " does not match agent count " + std::to_string(world.agents.size()));
  WorldState next;
  next.step = world.step + 1;
  next.config = world.config;
  next.agents.reserve(world.agents.size());
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    const AgentState& prev = world.agents[i];
    const AgentOutput& d = decisions[i];
    next.agents.push_back(AgentState{prev.id, apply_action(prev.pos, d.action, world.config->grid),
                                     d.memory, d.message});
  }
  return next;
}

double signed_boundary_distance(Position pos, const GridConfig& grid) {
  const int x0 = grid.bar_min.x, x1 = grid.bar_max_x();
  const int y0 = grid.bar_min.y, y1 = grid.bar_max_y();
  if (is_inside(pos, grid)) {
    const int depth = std::min(std::min(pos.x - (x0 - 1), (x1 + 1) - pos.x),
                               std::min(pos.y - (y0 - 1), (y1 + 1) - pos.y));
    return -static_cast<double>(depth);
  }
  const int dx = std::max({x0 - pos.x, 0, pos.x - x1});
  const int dy = std::max({y0 - pos.y, 0, pos.y - y1});
  return std::hypot(static_cast<double>(dx), static_cast<double>(dy));
}

WorldState make_initial_world(const SimConfig& cfg) {
  validate(cfg);
  WorldState world;
  world.step = 0;
  world.config = std::make_shared<const SimConfig>(cfg);
  world.agents.reserve(static_cast<std::size_t>(cfg.n_agents));
  SplitMix64 rng(cfg.rng_seed);
  for (int id = 0; id < cfg.n_agents; ++id) {
    Position pos;
    do {
      pos.x = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.grid.width)));
      pos.y = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.grid.height)));
    } while (cfg.exclude_bar_at_init && is_inside(pos, cfg.grid));
    world.agents.push_back(AgentState{id, pos, "", ""});
  }
  return world;
}

std::string agent_name(int agent_id) { return "Agent" + std::to_string(agent_id); }

}  // namespace elfarol
