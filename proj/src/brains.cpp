#include "elfarol/brains.hpp"

#include <cmath>

#include "elfarol/rng.hpp"

namespace elfarol {

std::vector<AgentOutput> Brain::decide_all(std::span<const Observation> obs, int step) {
  std::vector<AgentOutput> out;
  out.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i)
    out.push_back(decide(obs[i], step, static_cast<int>(i)));
  return out;
}

namespace {

// Move along the axis with the larger |delta| to the bar center; x wins ties.
Action toward_bar(Position pos, const GridConfig& grid) {
  const double dx = grid.bar_center_x() - pos.x;
  const double dy = grid.bar_center_y() - pos.y;
  if (dx == 0.0 && dy == 0.0) return Action::Stay;
  if (std::abs(dx) >= std::abs(dy)) return dx > 0 ? Action::XPlus : Action::XMinus;
  return dy > 0 ? Action::YPlus : Action::YMinus;
}

// The action whose result lies farthest outward (max signed boundary
// distance); ties resolve in fixed x+, x-, y+, y-, stay order.
Action toward_exit(Position pos, const GridConfig& grid) {
  Action best = Action::XPlus;
  double best_dist = -1e300;
  for (Action a : kAllActions) {
    const double d = signed_boundary_distance(apply_action(pos, a, grid), grid);
    if (d > best_dist) {
      best_dist = d;
      best = a;
    }
  }
  return best;
}

}  // namespace

AgentOutput GreedyToBarBrain::decide(const Observation& obs, int, int) {
  if (obs.inside) return AgentOutput{"", "", Action::Stay};
  return AgentOutput{"", "", toward_bar(obs.pos, grid_)};
}

AgentOutput ThresholdResponderBrain::decide(const Observation& obs, int, int) {
  if (!obs.inside) return AgentOutput{"", "", toward_bar(obs.pos, grid_)};
  if (obs.crowded_feedback.value_or(false))
    return AgentOutput{"", "", toward_exit(obs.pos, grid_)};
  return AgentOutput{"", "", Action::Stay};
}

AgentOutput RandomWalkBrain::decide(const Observation&, int step, int agent_id) {
  const std::uint64_t agent_seed = mix_seed(seed_, static_cast<std::uint64_t>(agent_id));
  SplitMix64 g(mix_seed(agent_seed, static_cast<std::uint64_t>(step)));
  return AgentOutput{"", "", kAllActions[g.next_below(5)]};
}

AgentOutput ReplayBrain::decide(const Observation&, int step, int agent_id) {
  if (agent_id < 0 || agent_id >= log_.n_agents() || step < 0 || step >= log_.n_steps())
    throw DataError("replay source has no record for step " + std::to_string(step) + ", agent " +
                    std::to_string(agent_id));
  const StepRecord& rec = log_.at(step, agent_id);
  return AgentOutput{rec.message, rec.memory, rec.action};
}

AgentOutput LlmBrain::decide(const Observation& obs, int, int) {
  return parse_response(client_->complete(build_prompt(obs, tmpl_)).text);
}

std::vector<AgentOutput> LlmBrain::decide_all(std::span<const Observation> obs, int step) {
  std::vector<std::string> prompts;
  prompts.reserve(obs.size());
  for (const Observation& o : obs) prompts.push_back(build_prompt(o, tmpl_));
  const std::vector<CompletionOutcome> outcomes = client_->complete_batch(prompts);
  std::vector<AgentOutput> out;
  out.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok())
      throw TransportError("agent " + std::to_string(i) + " step " + std::to_string(step) + ": " +
                           outcomes[i].error_code + ": " + outcomes[i].error_message);
    out.push_back(parse_response(outcomes[i].result->text));
  }
  return out;
}

std::unique_ptr<Brain> make_brain(const SimConfig& cfg) {
  switch (cfg.brain.kind) {
    case BrainSpec::Kind::GreedyToBar:
      return std::make_unique<GreedyToBarBrain>(cfg.grid);
    case BrainSpec::Kind::ThresholdResponder:
      return std::make_unique<ThresholdResponderBrain>(cfg.grid);
    case BrainSpec::Kind::RandomWalk:
      return std::make_unique<RandomWalkBrain>(cfg.rng_seed);
    case BrainSpec::Kind::Replay:
      return std::make_unique<ReplayBrain>(load_run(cfg.brain.replay_source, LoadMode::Lenient));
    case BrainSpec::Kind::Llm: {
      auto client = std::make_shared<LlmClient>(cfg.brain.llm);
      PromptTemplate tmpl =
          cfg.template_file.empty()
              ? PromptTemplate::defaults(cfg.grid, cfg.venue_name)
              : PromptTemplate::from_file(cfg.template_file, cfg.grid, cfg.venue_name);
      return std::make_unique<LlmBrain>(std::move(client), std::move(tmpl));
    }
  }
  throw ConfigError("unknown brain kind");
}

}  // namespace elfarol
