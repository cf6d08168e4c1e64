#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elfarol/errors.hpp"
#include "elfarol/llm_client.hpp"

namespace elfarol {

struct Position {
  int x = 0;
  int y = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

// The five-token action set. No diagonal moves.
enum class Action { XPlus, XMinus, YPlus, YMinus, Stay };

inline constexpr Action kAllActions[] = {Action::XPlus, Action::XMinus, Action::YPlus,
                                         Action::YMinus, Action::Stay};

// Wire/prompt vocabulary: x+1, x-1, y+1, y-1, stay.
std::string_view action_token(Action a);
std::optional<Action> action_from_token(std::string_view token);

struct GridConfig {
  int width = 50;
  int height = 50;
  Position bar_min{20, 20};  // inclusive corner
  int bar_size = 10;         // square side, cells [bar_min, bar_min+bar_size-1]

  int bar_max_x() const { return bar_min.x + bar_size - 1; }
  int bar_max_y() const { return bar_min.y + bar_size - 1; }
  double bar_center_x() const { return bar_min.x + (bar_size - 1) / 2.0; }
  double bar_center_y() const { return bar_min.y + (bar_size - 1) / 2.0; }

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

enum class DistanceMetric { Euclidean, Chebyshev };

struct BrainKindInfo;  // see brains.hpp

// Decision backend selector embedded in the scenario config.
struct BrainSpec {
  enum class Kind { Llm, GreedyToBar, ThresholdResponder, RandomWalk, Replay };
  Kind kind = Kind::RandomWalk;
  LlmConfig llm;              // Llm only
  std::string replay_source;  // Replay only: run directory to re-emit
  friend bool operator==(const BrainSpec&, const BrainSpec&) = default;
};

std::string_view brain_kind_name(BrainSpec::Kind k);
std::optional<BrainSpec::Kind> brain_kind_from_name(std::string_view name);

// Full scenario description; maps one-to-one onto the scenario config file.
struct SimConfig {
  GridConfig grid;
  int n_agents = 20;
  double threshold_fraction = 0.6;
  double comm_radius = 5.0;
  int max_steps = 1000;
  std::string venue_name = "El Farol Bar";
  std::uint64_t rng_seed = 0;
  BrainSpec brain;
  bool exclude_bar_at_init = false;
  DistanceMetric metric = DistanceMetric::Euclidean;
  std::string template_file;        // optional prompt template override
  bool record_transcripts = true;   // raw request/response audit for llm runs

  // ceil(threshold_fraction * n_agents), guarded against binary rounding, so
  // the 0.6 x 20 default lands on 12.
  int threshold_count() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Throws ConfigError when any invariant is violated (bar not contained in the
// grid, fraction out of (0,1], non-positive sizes, ...).
void validate(const SimConfig& cfg);

struct AgentState {
  int id = 0;
  Position pos;
  std::string memory;  // memory generated last step, fed back as Previous Memory
  std::string outbox;  // message generated last step, heard by neighbors
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

// Immutable snapshot; safe to share read-only across threads while decisions
// are computed.
struct WorldState {
  int step = 0;
  std::vector<AgentState> agents;
  std::shared_ptr<const SimConfig> config;
};

// One agent's decision for one step.
struct AgentOutput {
  std::string message;
  std::string memory;
  Action action = Action::Stay;
  friend bool operator==(const AgentOutput&, const AgentOutput&) = default;
};

bool is_inside(Position pos, const GridConfig& grid);

// Unit move clamped to the grid; a move into a wall resolves to no movement.
Position apply_action(Position pos, Action a, const GridConfig& grid);

int attendance(const WorldState& world);

// true iff attendance >= threshold_count ("60% or more" discomfort rule).
bool is_crowded(const WorldState& world);

double distance(Position a, Position b, DistanceMetric metric);

// Agents within comm_radius of agent_id that are on the same side of the bar
// boundary (both inside or both outside). Symmetric, irreflexive. Returned in
// ascending id order.
std::vector<int> neighbors(const WorldState& world, int agent_id);

// Synchronous transition: every position advances via apply_action from the
// same snapshot, memory/outbox are replaced by the decisions, step increments.
// Throws ConfigError when decisions.size() != n_agents.
WorldState step(const WorldState& world, std::span<const AgentOutput> decisions);

// Distance to the bar boundary, negative inside. Outside cells measure the
// Euclidean distance to the nearest bar cell; inside cells measure the
// distance to the nearest exterior cell line, negated. Never zero: the
// smallest magnitudes are +1 (adjacent outside) and -1 (edge cells inside).
double signed_boundary_distance(Position pos, const GridConfig& grid);

// Uniform random placement from the seeded generator; bar cells are excluded
// only when cfg.exclude_bar_at_init is set.
WorldState make_initial_world(const SimConfig& cfg);

std::string agent_name(int agent_id);

}  // namespace elfarol
