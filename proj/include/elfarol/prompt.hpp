#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "elfarol/world.hpp"

namespace elfarol {

struct InboxMessage {
  int sender_id = 0;
  std::string sender_name;
  std::string text;
  friend bool operator==(const InboxMessage&, const InboxMessage&) = default;
};

// Everything one agent can see at one step. crowded_feedback is present iff
// the agent is inside the bar; only inside agents learn the comfort status.
struct Observation {
  std::string agent_name;
  Position pos;
  std::string previous_memory;
  std::vector<InboxMessage> inbox;  // messages spoken by last step's neighbors
  bool inside = false;
  std::optional<bool> crowded_feedback;
};

// Per-step prompt shape: environment preamble, one status line picked by the
// bar's situation, the four labeled state blocks, then output instructions.
// Section texts may use the placeholders {name} {venue} {width} {height}
// {bar_x0} {bar_y0} {bar_x1} {bar_y1}.
struct PromptTemplate {
  std::string preamble;
  std::string status_inside_comfortable;
  std::string status_inside_uncomfortable;
  std::string status_outside;
  std::string instructions;
  std::string label_name = "Name";
  std::string label_position = "Current Position";
  std::string label_memory = "Previous Memory";
  std::string label_inbox = "Nearby Agents' Message";
  std::string none_marker = "none";
  std::string venue_name = "El Farol Bar";
  GridConfig grid;

  static PromptTemplate defaults(const GridConfig& grid, std::string venue);

  // Sectioned plain-text override file: lines of the form [section] start a
  // section (preamble, status_inside_comfortable, status_inside_uncomfortable,
  // status_outside, instructions, label_name, label_position, label_memory,
  // label_inbox, none_marker); the body runs until the next section header.
  // Missing sections keep their defaults. Throws ConfigError on unknown
  // sections or unreadable files.
  static PromptTemplate from_file(const std::filesystem::path& path, const GridConfig& grid,
                                  std::string venue);
};

// Renders the full prompt text. Deterministic: identical observation and
// template produce byte-identical output. Inbox lines are ordered by
// ascending sender id; empty memory/inbox render the none marker.
// Throws ConfigError when crowded_feedback presence contradicts inside.
std::string build_prompt(const Observation& obs, const PromptTemplate& tmpl);

// Total function: extracts the labeled Message/Memory/Action sections from
// arbitrary text (case-insensitive headers, markdown decoration tolerated).
// Unparseable action tokens and missing sections fall back to Stay / empty.
AgentOutput parse_response(std::string_view text);

}  // namespace elfarol
