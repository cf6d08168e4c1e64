#include "elfarol/recorder.hpp"

#include <json.hpp>

#include "elfarol/version.hpp"

namespace elfarol {

using nlohmann::json;

namespace {

json config_to_json(const SimConfig& cfg) {
  json j;
  j["width"] = cfg.grid.width;
  j["height"] = cfg.grid.height;
  j["bar_min_x"] = cfg.grid.bar_min.x;
  j["bar_min_y"] = cfg.grid.bar_min.y;
  j["bar_size"] = cfg.grid.bar_size;
  j["n_agents"] = cfg.n_agents;
  j["threshold_fraction"] = cfg.threshold_fraction;
  j["comm_radius"] = cfg.comm_radius;
  j["max_steps"] = cfg.max_steps;
  j["venue_name"] = cfg.venue_name;
  j["rng_seed"] = cfg.rng_seed;
  j["brain"] = std::string(brain_kind_name(cfg.brain.kind));
  if (cfg.brain.kind == BrainSpec::Kind::Replay) j["replay_source"] = cfg.brain.replay_source;
  if (cfg.brain.kind == BrainSpec::Kind::Llm) {
    j["llm_model"] = cfg.brain.llm.model_name;
    j["llm_temperature"] = cfg.brain.llm.temperature;
    j["llm_max_tokens"] = cfg.brain.llm.max_tokens;
    j["llm_max_concurrency"] = cfg.brain.llm.max_concurrency;
  }
  j["exclude_bar_at_init"] = cfg.exclude_bar_at_init;
  j["distance_metric"] = cfg.metric == DistanceMetric::Chebyshev ? "chebyshev" : "euclidean";
  if (!cfg.template_file.empty()) j["template_file"] = cfg.template_file;
  j["record_transcripts"] = cfg.record_transcripts;
  return j;
}

template <typename T>
T require(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw SchemaError(std::string(where) + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

SimConfig config_from_json(const json& j, const char* where) {
  SimConfig cfg;
  cfg.grid.width = require<int>(j, "width", where);
  cfg.grid.height = require<int>(j, "height", where);
  cfg.grid.bar_min.x = require<int>(j, "bar_min_x", where);
  cfg.grid.bar_min.y = require<int>(j, "bar_min_y", where);
  cfg.grid.bar_size = require<int>(j, "bar_size", where);
  cfg.n_agents = require<int>(j, "n_agents", where);
  cfg.threshold_fraction = require<double>(j, "threshold_fraction", where);
  cfg.comm_radius = require<double>(j, "comm_radius", where);
  cfg.max_steps = require<int>(j, "max_steps", where);
  cfg.venue_name = require<std::string>(j, "venue_name", where);
  cfg.rng_seed = require<std::uint64_t>(j, "rng_seed", where);
  const std::string brain = require<std::string>(j, "brain", where);
  if (auto kind = brain_kind_from_name(brain))
    cfg.brain.kind = *kind;
  else
    throw SchemaError(std::string(where) + ": unknown brain kind '" + brain + "'");
  if (j.contains("replay_source")) cfg.brain.replay_source = j["replay_source"].get<std::string>();
  if (j.contains("llm_model")) cfg.brain.llm.model_name = j["llm_model"].get<std::string>();
  if (j.contains("llm_temperature"))
    cfg.brain.llm.temperature = j["llm_temperature"].get<double>();
  if (j.contains("llm_max_tokens")) cfg.brain.llm.max_tokens = j["llm_max_tokens"].get<int>();
  if (j.contains("llm_max_concurrency"))
    cfg.brain.llm.max_concurrency = j["llm_max_concurrency"].get<int>();
  if (j.contains("exclude_bar_at_init"))
    cfg.exclude_bar_at_init = j["exclude_bar_at_init"].get<bool>();
  if (j.contains("distance_metric"))
    cfg.metric = j["distance_metric"].get<std::string>() == "chebyshev"
                     ? DistanceMetric::Chebyshev
                     : DistanceMetric::Euclidean;
  if (j.contains("template_file")) cfg.template_file = j["template_file"].get<std::string>();
  if (j.contains("record_transcripts"))
    cfg.record_transcripts = j["record_transcripts"].get<bool>();
  return cfg;
}

std::string dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["engine_version"] = m.engine_version;
  j["start_time"] = m.start_time;
  j["brain"] = m.brain_kind;
  j["config"] = config_to_json(m.config);
  json pos = json::array();
  for (const Position& p : m.initial_positions) pos.push_back(json::array({p.x, p.y}));
  j["initial_positions"] = pos;
  j["complete"] = m.complete;
  j["steps_completed"] = m.steps_completed;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest.json: ") + e.what());
  }
  RunManifest m;
  m.schema_version = require<int>(j, "schema_version", "manifest.json");
  m.engine_version = require<std::string>(j, "engine_version", "manifest.json");
  m.start_time = require<std::string>(j, "start_time", "manifest.json");
  m.brain_kind = require<std::string>(j, "brain", "manifest.json");
  if (!j.contains("config")) throw SchemaError("manifest.json: missing field 'config'");
  m.config = config_from_json(j["config"], "manifest.json config");
  if (!j.contains("initial_positions"))
    throw SchemaError("manifest.json: missing field 'initial_positions'");
  for (const json& p : j["initial_positions"]) {
    if (!p.is_array() || p.size() != 2)
      throw SchemaError("manifest.json: initial_positions entries must be [x, y]");
    m.initial_positions.push_back(Position{p[0].get<int>(), p[1].get<int>()});
  }
  m.complete = require<bool>(j, "complete", "manifest.json");
  m.steps_completed = require<int>(j, "steps_completed", "manifest.json");
  return m;
}

std::string record_to_json_line(const StepRecord& rec) {
  json j;
  j["step"] = rec.step;
  j["agent_id"] = rec.agent_id;
  j["x_before"] = rec.pos_before.x;
  j["y_before"] = rec.pos_before.y;
  j["action"] = std::string(action_token(rec.action));
  j["x_after"] = rec.pos_after.x;
  j["y_after"] = rec.pos_after.y;
  j["message"] = rec.message;
  j["memory"] = rec.memory;
  j["inside_after"] = rec.inside_after;
  j["crowded_before"] = rec.crowded_before;
  return dump(j);
}

std::filesystem::path RunWriter::trace_path(const std::filesystem::path& dir) {
  return dir / "trace.jsonl";
}
std::filesystem::path RunWriter::manifest_path(const std::filesystem::path& dir) {
  return dir / "manifest.json";
}

RunWriter::RunWriter(std::filesystem::path dir, RunManifest manifest)
    : dir_(std::move(dir)), manifest_(std::move(manifest)) {
  std::filesystem::create_directories(dir_);
  if (manifest_.engine_version.empty()) manifest_.engine_version = kEngineVersion;
  manifest_.complete = false;
  manifest_.steps_completed = 0;
  write_manifest();
  trace_.open(trace_path(dir_), std::ios::binary | std::ios::trunc);
  if (!trace_) throw DataError("cannot open trace for writing: " + trace_path(dir_).string());
}

RunWriter::~RunWriter() {
  // An abandoned writer leaves the manifest marked incomplete on purpose.
  if (trace_.is_open()) trace_.flush();
}

void RunWriter::write_manifest() {
  std::ofstream out(manifest_path(dir_), std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest: " + manifest_path(dir_).string());
  out << manifest_to_json(manifest_);
}

void RunWriter::append(const StepRecord& rec) {
  const SimConfig& cfg = manifest_.config;
  if (rec.step != next_step_ || rec.agent_id != next_agent_)
    throw ConsistencyError("record out of order: expected (step " + std::to_string(next_step_) +
                           ", agent " + std::to_string(next_agent_) + "), got (step " +
                           std::to_string(rec.step) + ", agent " + std::to_string(rec.agent_id) +
                           ")");
  if (rec.pos_after != apply_action(rec.pos_before, rec.action, cfg.grid))
    throw ConsistencyError("record pos_after does not follow from pos_before and action at step " +
                           std::to_string(rec.step) + ", agent " + std::to_string(rec.agent_id));
  if (rec.inside_after != is_inside(rec.pos_after, cfg.grid))
    throw ConsistencyError("record inside_after flag is wrong at step " +
                           std::to_string(rec.step) + ", agent " + std::to_string(rec.agent_id));
  trace_ << record_to_json_line(rec) << '\n';
  if (!trace_) throw DataError("trace write failed: " + trace_path(dir_).string());
  if (++next_agent_ == cfg.n_agents) {
    next_agent_ = 0;
    ++next_step_;
  }
}

void RunWriter::flush() {
  trace_.flush();
  if (!trace_) throw DataError("trace flush failed: " + trace_path(dir_).string());
}

void RunWriter::finalize(int steps_completed, bool complete) {
  if (finalized_) return;
  // An abort may land mid-step (I/O failure during append); only a run
  // claiming completeness must end on a step boundary.
  if (next_agent_ != 0 && complete)
    throw ConsistencyError("finalize in the middle of step " + std::to_string(next_step_));
  trace_.flush();
  trace_.close();
  manifest_.steps_completed = steps_completed;
  manifest_.complete = complete;
  write_manifest();
  finalized_ = true;
}

namespace {

StepRecord record_from_json(const json& j, const char* where) {
  StepRecord rec;
  rec.step = require<int>(j, "step", where);
  rec.agent_id = require<int>(j, "agent_id", where);
  rec.pos_before.x = require<int>(j, "x_before", where);
  rec.pos_before.y = require<int>(j, "y_before", where);
  const std::string token = require<std::string>(j, "action", where);
  if (auto a = action_from_token(token))
    rec.action = *a;
  else
    throw SchemaError(std::string(where) + ": unknown action token '" + token + "'");
  rec.pos_after.x = require<int>(j, "x_after", where);
  rec.pos_after.y = require<int>(j, "y_after", where);
  rec.message = require<std::string>(j, "message", where);
  rec.memory = require<std::string>(j, "memory", where);
  rec.inside_after = require<bool>(j, "inside_after", where);
  rec.crowded_before = require<bool>(j, "crowded_before", where);
  return rec;
}

}  // namespace

RunLog load_run(const std::filesystem::path& dir, LoadMode mode) {
  const auto manifest_file = RunWriter::manifest_path(dir);
  const auto trace_file = RunWriter::trace_path(dir);
  if (!std::filesystem::exists(manifest_file))
    throw DataError("missing manifest: " + manifest_file.string());
  if (!std::filesystem::exists(trace_file))
    throw DataError("missing trace: " + trace_file.string());

  RunLog log;
  {
    std::ifstream in(manifest_file, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    log.manifest = manifest_from_json(text);
  }
  const SimConfig& cfg = log.manifest.config;
  validate(cfg);
  if (static_cast<int>(log.manifest.initial_positions.size()) != cfg.n_agents)
    throw ConsistencyError("manifest initial_positions count does not match n_agents");

  std::ifstream in(trace_file, std::ios::binary);
  std::string line;
  long line_no = 0;
  int expected_step = 0, expected_agent = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("trace.jsonl:" + std::to_string(line_no) + ": " + e.what());
    }
    const std::string where = "trace.jsonl:" + std::to_string(line_no);
    StepRecord rec = record_from_json(j, where.c_str());
    if (rec.step != expected_step || rec.agent_id != expected_agent)
      throw ConsistencyError(where + ": records out of order or step incomplete (expected step " +
                             std::to_string(expected_step) + ", agent " +
                             std::to_string(expected_agent) + ")");
    log.records.push_back(std::move(rec));
    if (++expected_agent == cfg.n_agents) {
      expected_agent = 0;
      ++expected_step;
    }
  }
  if (expected_agent != 0)
    throw ConsistencyError("trace.jsonl ends mid-step: step " + std::to_string(expected_step) +
                           " has only " + std::to_string(expected_agent) + " of " +
                           std::to_string(cfg.n_agents) + " records");

  if (mode == LoadMode::Strict) {
    const int n = cfg.n_agents;
    const int steps = log.n_steps();
    for (int t = 0; t < steps; ++t) {
      int att_before = 0;
      for (int i = 0; i < n; ++i)
        if (is_inside(log.at(t, i).pos_before, cfg.grid)) ++att_before;
      const bool crowded = att_before >= cfg.threshold_count();
      for (int i = 0; i < n; ++i) {
        const StepRecord& rec = log.at(t, i);
        const std::string where =
            "step " + std::to_string(t) + ", agent " + std::to_string(i);
        if (t == 0 && rec.pos_before != log.manifest.initial_positions[static_cast<size_t>(i)])
          throw ConsistencyError(where + ": pos_before disagrees with manifest placement");
        if (t > 0 && rec.pos_before != log.at(t - 1, i).pos_after)
          throw ConsistencyError(where + ": pos_before disagrees with previous pos_after");
        if (rec.pos_after != apply_action(rec.pos_before, rec.action, cfg.grid))
          throw ConsistencyError(where + ": pos_after does not follow from pos_before and action");
        if (rec.inside_after != is_inside(rec.pos_after, cfg.grid))
          throw ConsistencyError(where + ": inside_after flag is wrong");
        if (rec.crowded_before != crowded)
          throw ConsistencyError(where + ": crowded_before flag is wrong");
      }
    }
  }
  return log;
}

}  // namespace elfarol
