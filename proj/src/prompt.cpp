#include "elfarol/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace elfarol {

namespace {

constexpr std::string_view kDefaultPreamble =
    "You are {name}, one of several agents living on a {width} x {height} grid. "
    "Cells ({bar_x0}, {bar_y0}) through ({bar_x1}, {bar_y1}) are {venue}. "
    "You move one cell per step and can talk with agents near you.";
constexpr std::string_view kDefaultInsideComfortable =
    "You are currently inside {venue}. It feels comfortable.";
constexpr std::string_view kDefaultInsideUncomfortable =
    "You are currently inside {venue}. It feels crowded and uncomfortable.";
constexpr std::string_view kDefaultOutside = "You are currently outside {venue}.";
constexpr std::string_view kDefaultInstructions =
    "Reply in exactly this form:\n"
    "Message: <one line you say to nearby agents>\n"
    "Memory: <one line of notes for your future self>\n"
    "Action: <one of x+1, x-1, y+1, y-1, stay>";

void replace_all(std::string& text, std::string_view token, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string::npos) {
    text.replace(pos, token.size(), value);
    pos += value.size();
  }
}

std::string substitute(std::string_view raw, const PromptTemplate& tmpl, const std::string& name) {
  std::string text(raw);
  replace_all(text, "{name}", name);
  replace_all(text, "{venue}", tmpl.venue_name);
  replace_all(text, "{width}", std::to_string(tmpl.grid.width));
  replace_all(text, "{height}", std::to_string(tmpl.grid.height));
  replace_all(text, "{bar_x0}", std::to_string(tmpl.grid.bar_min.x));
  replace_all(text, "{bar_y0}", std::to_string(tmpl.grid.bar_min.y));
  replace_all(text, "{bar_x1}", std::to_string(tmpl.grid.bar_max_x()));
  replace_all(text, "{bar_y1}", std::to_string(tmpl.grid.bar_max_y()));
  return text;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Matches an optionally markdown-decorated section header at the start of a
// line: "Message:", "**memory:**", "### Action :", ... Returns the content
// after the colon, or nullopt.
std::optional<std::string> match_header(std::string_view line, std::string_view label) {
  std::size_t i = 0;
  auto is_decor = [](char c) {
    return c == '*' || c == '#' || c == '>' || c == '-' || c == '`' || c == '_' || c == ' ' ||
           c == '\t';
  };
  while (i < line.size() && is_decor(line[i])) ++i;
  if (i + label.size() > line.size()) return std::nullopt;
  for (std::size_t k = 0; k < label.size(); ++k)
    if (std::tolower(static_cast<unsigned char>(line[i + k])) != label[k]) return std::nullopt;
  i += label.size();
  while (i < line.size() && (line[i] == '*' || line[i] == '_' || line[i] == '`' || line[i] == ' ' ||
                             line[i] == '\t'))
    ++i;
  if (i >= line.size() || line[i] != ':') return std::nullopt;
  ++i;
  // skip a closing decoration after the colon ("**Message:** hi")
  while (i < line.size() && (line[i] == '*' || line[i] == '_' || line[i] == '`')) ++i;
  return std::string(line.substr(i));
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// First occurrence of a standalone "stay" (word boundaries both sides).
std::size_t find_stay(const std::string& text) {
  std::size_t pos = 0;
  while ((pos = text.find("stay", pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const bool right_ok = pos + 4 >= text.size() || !is_word_char(text[pos + 4]);
    if (left_ok && right_ok) return pos;
    ++pos;
  }
  return std::string::npos;
}

Action parse_action_text(const std::string& raw) {
  std::string text = lower(raw);
  // Collapse internal whitespace so "x + 1" still matches.
  std::string squeezed;
  squeezed.reserve(text.size());
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) squeezed.push_back(c);

  struct Candidate {
    std::string_view token;
    Action action;
  };
  static constexpr Candidate kMoves[] = {{"x+1", Action::XPlus},
                                         {"x-1", Action::XMinus},
                                         {"y+1", Action::YPlus},
                                         {"y-1", Action::YMinus}};
  std::size_t best_pos = std::string::npos;
  Action best = Action::Stay;
  bool found = false;
  for (const Candidate& c : kMoves) {
    const std::size_t pos = squeezed.find(c.token);
    if (pos != std::string::npos && (!found || pos < best_pos)) {
      best_pos = pos;
      best = c.action;
      found = true;
    }
  }
  // "stay" is matched on the squeezed text too, with word boundaries so that
  // e.g. "staying" does not count.
  const std::size_t stay_pos = find_stay(squeezed);
  if (stay_pos != std::string::npos && (!found || stay_pos < best_pos)) return Action::Stay;
  return found ? best : Action::Stay;
}

}  // namespace

PromptTemplate PromptTemplate::defaults(const GridConfig& grid, std::string venue) {
  PromptTemplate tmpl;
  tmpl.preamble = std::string(kDefaultPreamble);
  tmpl.status_inside_comfortable = std::string(kDefaultInsideComfortable);
  tmpl.status_inside_uncomfortable = std::string(kDefaultInsideUncomfortable);
  tmpl.status_outside = std::string(kDefaultOutside);
  tmpl.instructions = std::string(kDefaultInstructions);
  tmpl.venue_name = std::move(venue);
  tmpl.grid = grid;
  return tmpl;
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path, const GridConfig& grid,
                                         std::string venue) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read template file: " + path.string());
  PromptTemplate tmpl = defaults(grid, std::move(venue));

  std::string* section = nullptr;
  bool section_started = false;
  std::string line;
  auto select = [&](const std::string& name) -> std::string* {
    if (name == "preamble") return &tmpl.preamble;
    if (name == "status_inside_comfortable") return &tmpl.status_inside_comfortable;
    if (name == "status_inside_uncomfortable") return &tmpl.status_inside_uncomfortable;
    if (name == "status_outside") return &tmpl.status_outside;
    if (name == "instructions") return &tmpl.instructions;
    if (name == "label_name") return &tmpl.label_name;
    if (name == "label_position") return &tmpl.label_position;
    if (name == "label_memory") return &tmpl.label_memory;
    if (name == "label_inbox") return &tmpl.label_inbox;
    if (name == "none_marker") return &tmpl.none_marker;
    throw ConfigError("unknown template section [" + name + "] in " + path.string());
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
      section = select(t.substr(1, t.size() - 2));
      section->clear();
      section_started = false;
      continue;
    }
    if (section == nullptr) {
      // before the first section: blank lines and # comments only
      if (!t.empty() && t.front() != '#')
        throw ConfigError("template text before any [section] in " + path.string());
      continue;
    }
    if (section_started) section->push_back('\n');
    section->append(line);
    section_started = true;
  }
  // Trailing blank lines in a section are not significant.
  auto rtrim_nl = [](std::string& s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  };
  rtrim_nl(tmpl.preamble);
  rtrim_nl(tmpl.status_inside_comfortable);
  rtrim_nl(tmpl.status_inside_uncomfortable);
  rtrim_nl(tmpl.status_outside);
  rtrim_nl(tmpl.instructions);
  return tmpl;
}

std::string build_prompt(const Observation& obs, const PromptTemplate& tmpl) {
  if (obs.crowded_feedback.has_value() != obs.inside)
    throw ConfigError("observation inconsistent: crowded feedback must be present iff inside");

  const std::string_view status_raw =
      !obs.inside ? std::string_view(tmpl.status_outside)
                  : (*obs.crowded_feedback ? std::string_view(tmpl.status_inside_uncomfortable)
                                           : std::string_view(tmpl.status_inside_comfortable));

  std::ostringstream out;
  out << substitute(tmpl.preamble, tmpl, obs.agent_name) << '\n';
  out << substitute(status_raw, tmpl, obs.agent_name) << '\n';
  out << '\n';
  out << tmpl.label_name << ": " << obs.agent_name << '\n';
  out << tmpl.label_position << ": (" << obs.pos.x << ", " << obs.pos.y << ")\n";
  out << tmpl.label_memory << ": "
      << (obs.previous_memory.empty() ? tmpl.none_marker : obs.previous_memory) << '\n';
  if (obs.inbox.empty()) {
    out << tmpl.label_inbox << ": " << tmpl.none_marker << '\n';
  } else {
    std::vector<const InboxMessage*> ordered;
    ordered.reserve(obs.inbox.size());
    for (const InboxMessage& m : obs.inbox) ordered.push_back(&m);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const InboxMessage* a, const InboxMessage* b) {
                       return a->sender_id < b->sender_id;
                     });
    out << tmpl.label_inbox << ":\n";
    for (const InboxMessage* m : ordered) out << m->sender_name << ": " << m->text << '\n';
  }
  out << '\n';
  out << substitute(tmpl.instructions, tmpl, obs.agent_name) << '\n';
  return out.str();
}

AgentOutput parse_response(std::string_view text) {
  AgentOutput out;
  std::optional<std::string> message, memory, action;
  std::string* current = nullptr;

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (auto rest = match_header(line, "message")) {
      if (!message) {
        message = *rest;
        current = &*message;
      } else {
        current = nullptr;  // duplicate header: first one wins
      }
    } else if (auto rest2 = match_header(line, "memory")) {
      if (!memory) {
        memory = *rest2;
        current = &*memory;
      } else {
        current = nullptr;
      }
    } else if (auto rest3 = match_header(line, "action")) {
      if (!action) {
        action = *rest3;
        current = &*action;
      } else {
        current = nullptr;
      }
    } else if (current != nullptr) {
      current->push_back('\n');
      current->append(line);
    }
    if (end == text.size()) break;
    start = end + 1;
  }

  out.message = message ? trim(*message) : "";
  out.memory = memory ? trim(*memory) : "";
  out.action = action ? parse_action_text(*action) : Action::Stay;
  return out;
}

}  // namespace elfarol
