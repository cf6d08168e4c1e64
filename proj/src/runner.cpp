#include "elfarol/runner.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "elfarol/prompt.hpp"
#include "elfarol/version.hpp"

namespace elfarol {

namespace {

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::vector<Observation> build_observations(const WorldState& world,
                                            const std::vector<std::vector<InboxMessage>>& inboxes) {
  const bool crowded = is_crowded(world);
  std::vector<Observation> obs;
  obs.reserve(world.agents.size());
  for (const AgentState& agent : world.agents) {
    Observation o;
    o.agent_name = agent_name(agent.id);
    o.pos = agent.pos;
    o.previous_memory = agent.memory;
    o.inbox = inboxes[static_cast<std::size_t>(agent.id)];
    o.inside = is_inside(agent.pos, world.config->grid);
    if (o.inside) o.crowded_feedback = crowded;
    obs.push_back(std::move(o));
  }
  return obs;
}

// Messages decided at this snapshot are heard next step by the speaker's
// current neighbors (same-side, within the communication radius).
std::vector<std::vector<InboxMessage>> distribute_messages(
    const WorldState& world, const std::vector<AgentOutput>& decisions) {
  std::vector<std::vector<InboxMessage>> inboxes(world.agents.size());
  for (const AgentState& listener : world.agents) {
    for (int speaker : neighbors(world, listener.id)) {
      const std::string& text = decisions[static_cast<std::size_t>(speaker)].message;
      if (text.empty()) continue;
      inboxes[static_cast<std::size_t>(listener.id)].push_back(
          InboxMessage{speaker, agent_name(speaker), text});
    }
  }
  return inboxes;
}

}  // namespace

RunResult run_simulation(const RunOptions& opts, Brain* brain_override) {
  const SimConfig& cfg = opts.config;
  validate(cfg);

  std::unique_ptr<Brain> owned;
  Brain* brain = brain_override;
  if (brain == nullptr) {
    owned = make_brain(cfg);
    brain = owned.get();
  }

  WorldState world = make_initial_world(cfg);
  if (opts.initial_positions.has_value()) {
    if (opts.initial_positions->size() != world.agents.size())
      throw ConfigError("initial position override count does not match n_agents");
    for (std::size_t i = 0; i < world.agents.size(); ++i)
      world.agents[i].pos = (*opts.initial_positions)[i];
  }

  RunManifest manifest;
  manifest.schema_version = kTraceSchemaVersion;
  manifest.engine_version = kEngineVersion;
  manifest.start_time = iso_now();
  manifest.brain_kind = std::string(brain->kind_name());
  manifest.config = cfg;
  for (const AgentState& a : world.agents) manifest.initial_positions.push_back(a.pos);
  RunWriter writer(opts.out_dir, std::move(manifest));

  // Raw request/response audit for LLM runs: the runs are unreproducible, so
  // the transcripts are the scientific record.
  std::ofstream transcripts;
  std::mutex transcript_mutex;
  std::atomic<int> transcript_step{0};
  if (auto* llm = dynamic_cast<LlmBrain*>(brain); llm != nullptr && cfg.record_transcripts) {
    transcripts.open(opts.out_dir / "transcripts.jsonl", std::ios::binary | std::ios::trunc);
    llm->client().set_transcript_sink([&](std::size_t index, const std::string& request,
                                          const std::string& response, int attempts,
                                          double latency_ms) {
      nlohmann::json j;
      j["step"] = transcript_step.load();
      j["agent_id"] = static_cast<int>(index);
      j["request"] = request;
      j["response"] = response;
      j["attempts"] = attempts;
      j["latency_ms"] = latency_ms;
      std::lock_guard<std::mutex> lock(transcript_mutex);
      transcripts << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    });
  }

  std::vector<std::vector<InboxMessage>> inboxes(world.agents.size());
  int steps_done = 0;
  try {
    for (int t = 0; t < cfg.max_steps; ++t) {
      transcript_step.store(t);
      const bool crowded_before = is_crowded(world);
      const std::vector<Observation> obs = build_observations(world, inboxes);
      const std::vector<AgentOutput> decisions = brain->decide_all(obs, t);
      if (decisions.size() != world.agents.size())
        throw ConfigError("brain returned " + std::to_string(decisions.size()) +
                          " decisions for " + std::to_string(world.agents.size()) + " agents");

      std::vector<std::vector<InboxMessage>> next_inboxes = distribute_messages(world, decisions);
      WorldState next = step(world, decisions);

      for (std::size_t i = 0; i < world.agents.size(); ++i) {
        StepRecord rec;
        rec.step = t;
        rec.agent_id = static_cast<int>(i);
        rec.pos_before = world.agents[i].pos;
        rec.action = decisions[i].action;
        rec.pos_after = next.agents[i].pos;
        rec.message = decisions[i].message;
        rec.memory = decisions[i].memory;
        rec.inside_after = is_inside(next.agents[i].pos, cfg.grid);
        rec.crowded_before = crowded_before;
        writer.append(rec);
      }
      writer.flush();

      world = std::move(next);
      inboxes = std::move(next_inboxes);
      ++steps_done;
      if (opts.on_step)
        opts.on_step(StepSummary{t, attendance(world), cfg.n_agents, is_crowded(world)});
    }
  } catch (...) {
    writer.finalize(steps_done, false);
    throw;
  }
  writer.finalize(steps_done, true);
  return RunResult{opts.out_dir, steps_done, true, attendance(world)};
}

ReplayVerdict verify_replay(const std::filesystem::path& run_dir,
                            const std::filesystem::path& scratch_dir) {
  RunLog log = load_run(run_dir, LoadMode::Lenient);
  if (!log.manifest.complete)
    throw DataError("run is marked incomplete; refusing to replay: " + run_dir.string());

  RunOptions opts;
  opts.config = log.manifest.config;
  opts.config.max_steps = log.n_steps();
  opts.initial_positions = log.manifest.initial_positions;
  const int n_agents = log.n_agents();
  ReplayBrain brain(std::move(log));
  opts.out_dir = scratch_dir;
  run_simulation(opts, &brain);

  std::ifstream original(RunWriter::trace_path(run_dir), std::ios::binary);
  std::ifstream regenerated(RunWriter::trace_path(scratch_dir), std::ios::binary);
  std::string a, b;
  long line_no = 0;
  while (true) {
    const bool got_a = static_cast<bool>(std::getline(original, a));
    const bool got_b = static_cast<bool>(std::getline(regenerated, b));
    if (!got_a && !got_b) return ReplayVerdict{true, -1, -1, "traces byte-identical"};
    if (got_a != got_b)
      return ReplayVerdict{false, -1, -1, "trace lengths differ after line " +
                                              std::to_string(line_no)};
    if (a != b) {
      const int step = static_cast<int>(line_no / n_agents);
      const int agent = static_cast<int>(line_no % n_agents);
      return ReplayVerdict{false, step, agent,
                           "mismatch at step " + std::to_string(step) + ", agent " +
                               std::to_string(agent)};
    }
    ++line_no;
  }
}

}  // namespace elfarol
