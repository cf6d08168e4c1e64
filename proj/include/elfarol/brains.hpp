#pragma once

#include <memory>
#include <span>
#include <vector>

#include "elfarol/llm_client.hpp"
#include "elfarol/prompt.hpp"
#include "elfarol/recorder.hpp"
#include "elfarol/world.hpp"

namespace elfarol {

// Uniform decision interface: Observation -> (message, memory, action).
// decide() for distinct agents at the same step may run concurrently;
// decide_all() is the per-step barrier the runner relies on.
class Brain {
 public:
  virtual ~Brain() = default;

  virtual AgentOutput decide(const Observation& obs, int step, int agent_id) = 0;

  // Default: sequential decide() per agent. The LLM brain overrides this with
  // a concurrent batch; either way the call returns only when every agent's
  // output is resolved.
  virtual std::vector<AgentOutput> decide_all(std::span<const Observation> obs, int step);

  virtual std::string_view kind_name() const = 0;
};

// Walks toward the bar center along the axis with the larger remaining
// delta (x wins ties) and stays once inside. Empty message/memory.
class GreedyToBarBrain : public Brain {
 public:
  explicit GreedyToBarBrain(GridConfig grid) : grid_(grid) {}
  AgentOutput decide(const Observation& obs, int step, int agent_id) override;
  std::string_view kind_name() const override { return "greedy"; }

 private:
  GridConfig grid_;
};

// Deterministic caricature of threshold-rational behavior: uncomfortable
// insiders head for the nearest exit, comfortable insiders stay, outsiders
// approach the bar. Lets the engine exhibit attendance oscillation around
// the threshold without any model calls.
class ThresholdResponderBrain : public Brain {
 public:
  explicit ThresholdResponderBrain(GridConfig grid) : grid_(grid) {}
  AgentOutput decide(const Observation& obs, int step, int agent_id) override;
  std::string_view kind_name() const override { return "threshold"; }

 private:
  GridConfig grid_;
};

// Uniform draw over the five actions; a pure function of
// (seed, agent_id, step) so traces replay bit-identically and adding agents
// does not perturb existing streams.
class RandomWalkBrain : public Brain {
 public:
  explicit RandomWalkBrain(std::uint64_t seed) : seed_(seed) {}
  AgentOutput decide(const Observation& obs, int step, int agent_id) override;
  std::string_view kind_name() const override { return "random"; }

 private:
  std::uint64_t seed_;
};

// Re-emits the outputs recorded in a RunLog. Missing (agent, step) pairs are
// errors.
class ReplayBrain : public Brain {
 public:
  explicit ReplayBrain(RunLog log) : log_(std::move(log)) {}
  AgentOutput decide(const Observation& obs, int step, int agent_id) override;
  std::string_view kind_name() const override { return "replay"; }

  const RunLog& log() const { return log_; }

 private:
  RunLog log_;
};

// build_prompt -> remote completion (concurrent batch) -> parse_response.
class LlmBrain : public Brain {
 public:
  LlmBrain(std::shared_ptr<LlmClient> client, PromptTemplate tmpl)
      : client_(std::move(client)), tmpl_(std::move(tmpl)) {}

  AgentOutput decide(const Observation& obs, int step, int agent_id) override;
  std::vector<AgentOutput> decide_all(std::span<const Observation> obs, int step) override;
  std::string_view kind_name() const override { return "llm"; }

  LlmClient& client() { return *client_; }

 private:
  std::shared_ptr<LlmClient> client_;
  PromptTemplate tmpl_;
};

// Builds the brain selected by cfg.brain. For Llm this constructs the client
// (credential check happens here, before any step runs); for Replay it loads
// the source run.
std::unique_ptr<Brain> make_brain(const SimConfig& cfg);

}  // namespace elfarol
