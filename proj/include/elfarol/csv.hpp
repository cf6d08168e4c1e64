#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "elfarol/errors.hpp"

namespace elfarol::csv {

// RFC-4180 style quoting, applied only when needed.
inline std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

// Minimal reader for the schemas this tool writes (quotes, embedded commas
// and newlines). Returns rows of fields, header included.
inline std::vector<std::vector<std::string>> read(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  int c;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(row);
    row.clear();
    any = false;
  };
  while ((c = in.get()) != EOF) {
    const char ch = static_cast<char>(c);
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n') {
      end_row();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  if (quoted) throw ParseError("csv: unterminated quoted field");
  if (any || !field.empty() || !row.empty()) end_row();
  return rows;
}

inline std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read csv: " + path.string());
  return read(in);
}

}  // namespace elfarol::csv
