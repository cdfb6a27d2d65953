#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "upir/incidence.hpp"

namespace upir {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line_number, const std::string& what)
      : std::runtime_error("cfg line " + std::to_string(line_number) + ": " +
                           what),
        line_number_(line_number) {}

  std::size_t line_number() const { return line_number_; }

 private:
  std::size_t line_number_;
};

namespace detail {

inline std::vector<std::string_view> cfg_tokens(std::string_view text) {
  if (auto hash = text.find('#'); hash != std::string_view::npos) {
    text = text.substr(0, hash);
  }
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

inline std::uint64_t cfg_uint(std::string_view token, std::size_t line_no) {
  std::uint64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line_no,
                     "expected unsigned integer, got '" + std::string(token) +
                         "'");
  }
  return value;
}

}  // namespace detail

/// Text format: `cfg <v> <b>`, then b lines of ascending point indices.
/// `#` starts a comment; blank lines are skipped; LF endings only.
inline IncidenceStructure parse_cfg(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  Point v = 0;
  std::uint64_t b = 0;
  std::vector<Line> lines;

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') {
      throw ParseError(line_no, "CR line ending; cfg files use LF only");
    }
    auto tokens = detail::cfg_tokens(raw);
    if (tokens.empty()) continue;

    if (!have_header) {
      if (tokens[0] != "cfg" || tokens.size() != 3) {
        throw ParseError(line_no, "expected header 'cfg <v> <b>'");
      }
      std::uint64_t v64 = detail::cfg_uint(tokens[1], line_no);
      if (v64 > 0xffffffffull) throw ParseError(line_no, "point count too large");
      v = static_cast<Point>(v64);
      b = detail::cfg_uint(tokens[2], line_no);
      have_header = true;
      continue;
    }

    if (lines.size() == b) {
      throw ParseError(line_no, "trailing content after " + std::to_string(b) +
                                    " declared lines");
    }
    Line line;
    line.reserve(tokens.size());
    for (auto token : tokens) {
      std::uint64_t p = detail::cfg_uint(token, line_no);
      if (p >= v) {
        throw ParseError(line_no, "point index " + std::to_string(p) +
                                      " not below v=" + std::to_string(v));
      }
      if (!line.empty() && static_cast<Point>(p) <= line.back()) {
        throw ParseError(line_no, "point indices must be strictly ascending");
      }
      line.push_back(static_cast<Point>(p));
    }
    if (line.size() < 2) {
      throw ParseError(line_no, "a line needs at least 2 points");
    }
    lines.push_back(std::move(line));
  }

  if (!have_header) throw ParseError(line_no, "missing 'cfg <v> <b>' header");
  if (lines.size() != b) {
    throw ParseError(line_no, "declared " + std::to_string(b) +
                                  " lines but found " +
                                  std::to_string(lines.size()));
  }
  try {
    return IncidenceStructure(v, std::move(lines));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
}

inline IncidenceStructure parse_cfg(const std::string& text) {
  std::istringstream in(text);
  return parse_cfg(in);
}

inline IncidenceStructure read_cfg_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open cfg file: " + path);
  return parse_cfg(in);
}

/// Canonical emission: lines sorted lexicographically, single spaces, LF.
inline std::string emit_cfg(const IncidenceStructure& structure) {
  IncidenceStructure canon = structure.canonical();
  std::ostringstream out;
  out << "cfg " << canon.point_count() << ' ' << canon.line_count() << '\n';
  for (const Line& line : canon.lines()) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i > 0) out << ' ';
      out << line[i];
    }
    out << '\n';
  }
  return out.str();
}

inline void write_cfg_file(const std::string& path,
                           const IncidenceStructure& structure) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write cfg file: " + path);
  out << emit_cfg(structure);
}

/// JSON sidecar carrying group and parallel-class annotations, keyed by
/// the canonical cfg file's line order.
struct Sidecar {
  std::vector<std::vector<Point>> groups;
  std::vector<std::vector<LineIndex>> parallel_classes;
};

inline std::string emit_sidecar(const Sidecar& sidecar) {
  nlohmann::json j;
  if (!sidecar.groups.empty()) j["groups"] = sidecar.groups;
  if (!sidecar.parallel_classes.empty()) {
    j["parallel_classes"] = sidecar.parallel_classes;
  }
  return j.dump() + "\n";
}

inline Sidecar parse_sidecar(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Sidecar sidecar;
  if (j.contains("groups")) {
    sidecar.groups = j.at("groups").get<std::vector<std::vector<Point>>>();
  }
  if (j.contains("parallel_classes")) {
    sidecar.parallel_classes =
        j.at("parallel_classes").get<std::vector<std::vector<LineIndex>>>();
  }
  return sidecar;
}

}  // namespace upir
