#include "elfarol/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace elfarol {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

long long parse_int(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  long long parsed = 0;
  try {
    parsed = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  return parsed;
}

double parse_real(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  double parsed = 0;
  try {
    parsed = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  return parsed;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

}  // namespace

SimConfig parse_scenario(const std::string& text, const std::string& origin) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));

    if (key == "width") cfg.grid.width = static_cast<int>(parse_int(value, key));
    else if (key == "height") cfg.grid.height = static_cast<int>(parse_int(value, key));
    else if (key == "bar_min_x") cfg.grid.bar_min.x = static_cast<int>(parse_int(value, key));
    else if (key == "bar_min_y") cfg.grid.bar_min.y = static_cast<int>(parse_int(value, key));
    else if (key == "bar_size") cfg.grid.bar_size = static_cast<int>(parse_int(value, key));
    else if (key == "n_agents") cfg.n_agents = static_cast<int>(parse_int(value, key));
    else if (key == "threshold_fraction") cfg.threshold_fraction = parse_real(value, key);
    else if (key == "comm_radius") cfg.comm_radius = parse_real(value, key);
    else if (key == "max_steps") cfg.max_steps = static_cast<int>(parse_int(value, key));
    else if (key == "venue_name") cfg.venue_name = value;
    else if (key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "brain") {
      if (auto kind = brain_kind_from_name(value))
        cfg.brain.kind = *kind;
      else
        throw ConfigError("key 'brain': unknown kind '" + value +
                          "' (expected llm, greedy, threshold, random, or replay)");
    } else if (key == "replay_source") cfg.brain.replay_source = value;
    else if (key == "llm_endpoint") cfg.brain.llm.endpoint_url = value;
    else if (key == "llm_model") cfg.brain.llm.model_name = value;
    else if (key == "llm_temperature") cfg.brain.llm.temperature = parse_real(value, key);
    else if (key == "llm_max_tokens") cfg.brain.llm.max_tokens = static_cast<int>(parse_int(value, key));
    else if (key == "llm_timeout_ms")
      cfg.brain.llm.request_timeout = std::chrono::milliseconds(parse_int(value, key));
    else if (key == "llm_max_retries") cfg.brain.llm.max_retries = static_cast<int>(parse_int(value, key));
    else if (key == "llm_max_concurrency")
      cfg.brain.llm.max_concurrency = static_cast<int>(parse_int(value, key));
    else if (key == "exclude_bar_at_init") cfg.exclude_bar_at_init = parse_bool(value, key);
    else if (key == "distance_metric") {
      if (value == "euclidean") cfg.metric = DistanceMetric::Euclidean;
      else if (value == "chebyshev") cfg.metric = DistanceMetric::Chebyshev;
      else throw ConfigError("key 'distance_metric': expected euclidean or chebyshev");
    } else if (key == "template_file") cfg.template_file = value;
    else if (key == "record_transcripts") cfg.record_transcripts = parse_bool(value, key);
    else throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  validate(cfg);
  return cfg;
}

SimConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_scenario(text, path.string());
}

}  // namespace elfarol
