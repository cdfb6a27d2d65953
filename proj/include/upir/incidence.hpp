#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace upir {

using Point = std::uint32_t;
using Line = std::vector<Point>;
using LineIndex = std::uint32_t;

namespace detail {

inline std::uint64_t pair_key(Point a, Point b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace detail

/// Points 0..v-1 plus a duplicate-free family of lines, each a strictly
/// ascending list of point indices. This is the raw structure; the
/// partial-linear-space axioms are checked by validate().
class IncidenceStructure {
 public:
  IncidenceStructure(Point point_count, std::vector<Line> lines)
      : point_count_(point_count), lines_(std::move(lines)) {
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      const Line& line = lines_[i];
      if (line.size() < 2) {
        throw std::invalid_argument("line " + std::to_string(i) +
                                    " has fewer than 2 points");
      }
      for (std::size_t j = 0; j < line.size(); ++j) {
        if (line[j] >= point_count_) {
          throw std::invalid_argument("line " + std::to_string(i) +
                                      " references point " +
                                      std::to_string(line[j]) +
                                      " outside [0, " +
                                      std::to_string(point_count_) + ")");
        }
        if (j > 0 && line[j] <= line[j - 1]) {
          throw std::invalid_argument("line " + std::to_string(i) +
                                      " is not strictly ascending");
        }
      }
    }
    std::vector<Line> sorted = lines_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("duplicate line in structure");
    }
  }

  Point point_count() const { return point_count_; }
  std::size_t line_count() const { return lines_.size(); }
  const std::vector<Line>& lines() const { return lines_; }
  const Line& line(LineIndex i) const { return lines_.at(i); }

  /// Canonical form: the same lines sorted lexicographically.
  IncidenceStructure canonical() const {
    std::vector<Line> sorted = lines_;
    std::sort(sorted.begin(), sorted.end());
    return IncidenceStructure(point_count_, std::move(sorted));
  }

  bool operator==(const IncidenceStructure& other) const {
    return point_count_ == other.point_count_ && lines_ == other.lines_;
  }

 private:
  Point point_count_;
  std::vector<Line> lines_;
};

struct ValidationReport {
  bool is_partial_linear_space = true;
  std::optional<std::uint32_t> regular_r;
  std::optional<std::uint32_t> uniform_k;
  bool is_connected = true;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }

  bool operator==(const ValidationReport& other) const {
    return is_partial_linear_space == other.is_partial_linear_space &&
           regular_r == other.regular_r && uniform_k == other.uniform_k &&
           is_connected == other.is_connected &&
           violations == other.violations;
  }
};

/// Checks the partial-linear-space axiom, regularity, uniformity and
/// connectedness. Findings are reported, never thrown.
inline ValidationReport validate(const IncidenceStructure& structure) {
  ValidationReport report;
  const Point v = structure.point_count();
  const auto& lines = structure.lines();

  if (v == 0) report.violations.push_back("structure has no points");
  if (lines.empty()) report.violations.push_back("structure has no lines");

  std::unordered_map<std::uint64_t, LineIndex> pair_seen;
  pair_seen.reserve(lines.size() * 4);
  for (LineIndex li = 0; li < lines.size(); ++li) {
    const Line& line = lines[li];
    for (std::size_t a = 0; a < line.size(); ++a) {
      for (std::size_t b = a + 1; b < line.size(); ++b) {
        auto [it, inserted] =
            pair_seen.emplace(detail::pair_key(line[a], line[b]), li);
        if (!inserted) {
          report.is_partial_linear_space = false;
          std::ostringstream msg;
          msg << "pair (" << line[a] << ", " << line[b] << ") lies on lines "
              << it->second << " and " << li;
          report.violations.push_back(msg.str());
        }
      }
    }
  }

  std::vector<std::uint32_t> degree(v, 0);
  for (const Line& line : lines) {
    for (Point p : line) ++degree[p];
  }
  if (v > 0) {
    bool regular = true;
    for (Point p = 1; p < v; ++p) {
      if (degree[p] != degree[0]) {
        regular = false;
        std::ostringstream msg;
        msg << "point " << p << " lies on " << degree[p]
            << " lines but point 0 lies on " << degree[0];
        report.violations.push_back(msg.str());
        break;
      }
    }
    if (regular) report.regular_r = degree[0];
  }

  if (!lines.empty()) {
    bool uniform = true;
    const std::size_t k = lines[0].size();
    for (LineIndex li = 1; li < lines.size(); ++li) {
      if (lines[li].size() != k) {
        uniform = false;
        std::ostringstream msg;
        msg << "line " << li << " has " << lines[li].size()
            << " points but line 0 has " << k;
        report.violations.push_back(msg.str());
        break;
      }
    }
    if (uniform) report.uniform_k = static_cast<std::uint32_t>(k);
  }

  // Union-find over the incidence graph.
  std::vector<Point> parent(v);
  for (Point p = 0; p < v; ++p) parent[p] = p;
  std::vector<Point> stack;
  auto find = [&](Point x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const Line& line : lines) {
    Point root = find(line[0]);
    for (std::size_t j = 1; j < line.size(); ++j) {
      parent[find(line[j])] = root;
    }
  }
  for (Point p = 1; p < v; ++p) {
    if (find(p) != find(0)) {
      report.is_connected = false;
      std::ostringstream msg;
      msg << "points 0 and " << p << " are in different components";
      report.violations.push_back(msg.str());
      break;
    }
  }

  return report;
}

class ConfigurationError : public std::runtime_error {
 public:
  explicit ConfigurationError(ValidationReport report)
      : std::runtime_error(describe(report)), report_(std::move(report)) {}

  const ValidationReport& report() const { return report_; }

 private:
  static std::string describe(const ValidationReport& report) {
    std::string msg = "not a combinatorial configuration";
    if (!report.violations.empty()) {
      msg += ": " + report.violations.front();
      if (report.violations.size() > 1) {
        msg += " (+" + std::to_string(report.violations.size() - 1) +
               " more finding(s))";
      }
    }
    return msg;
  }

  ValidationReport report_;
};

/// A validated r-regular, k-uniform, connected partial linear space with
/// cached per-point incidence and neighbor indexes. Immutable.
class Configuration {
 public:
  explicit Configuration(IncidenceStructure structure)
      : structure_(std::move(structure)) {
    ValidationReport report = upir::validate(structure_);
    if (!report.ok()) throw ConfigurationError(std::move(report));
    r_ = *report.regular_r;
    k_ = *report.uniform_k;

    const Point v = structure_.point_count();
    lines_through_.assign(v, {});
    neighbors_.assign(v, {});
    const auto& lines = structure_.lines();
    pair_line_.reserve(lines.size() * k_ * k_ / 2 + 1);
    for (LineIndex li = 0; li < lines.size(); ++li) {
      for (std::size_t a = 0; a < lines[li].size(); ++a) {
        lines_through_[lines[li][a]].push_back(li);
        for (std::size_t b = a + 1; b < lines[li].size(); ++b) {
          pair_line_.emplace(detail::pair_key(lines[li][a], lines[li][b]), li);
          neighbors_[lines[li][a]].push_back(lines[li][b]);
          neighbors_[lines[li][b]].push_back(lines[li][a]);
        }
      }
    }
    for (Point p = 0; p < v; ++p) std::sort(neighbors_[p].begin(), neighbors_[p].end());
  }

  const IncidenceStructure& structure() const { return structure_; }
  Point v() const { return structure_.point_count(); }
  std::uint32_t b() const { return static_cast<std::uint32_t>(structure_.line_count()); }
  std::uint32_t r() const { return r_; }
  std::uint32_t k() const { return k_; }
  const std::vector<Line>& lines() const { return structure_.lines(); }
  const Line& line(LineIndex i) const { return structure_.line(i); }

  const std::vector<LineIndex>& lines_through(Point p) const {
    check_point(p);
    return lines_through_[p];
  }

  /// N(p): points collinear with p, excluding p. Cardinality r(k-1).
  const std::vector<Point>& neighborhood(Point p) const {
    check_point(p);
    return neighbors_[p];
  }

  /// CN(p) = N(p) + {p}. Cardinality r(k-1)+1.
  std::vector<Point> closed_neighborhood(Point p) const {
    check_point(p);
    std::vector<Point> cn = neighbors_[p];
    cn.insert(std::upper_bound(cn.begin(), cn.end(), p), p);
    return cn;
  }

  /// v - (r(k-1)+1); zero exactly for regular linear spaces.
  std::uint32_t deficiency() const {
    return v() - (r_ * (k_ - 1) + 1);
  }

  bool collinear(Point p, Point q) const {
    check_point(p);
    check_point(q);
    if (p == q) return true;
    return std::binary_search(neighbors_[p].begin(), neighbors_[p].end(), q);
  }

  /// The unique line through two collinear points, if any.
  std::optional<LineIndex> line_through(Point p, Point q) const {
    check_point(p);
    check_point(q);
    auto it = pair_line_.find(detail::pair_key(p, q));
    if (it == pair_line_.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const Configuration& other) const {
    return structure_ == other.structure_;
  }

 private:
  void check_point(Point p) const {
    if (p >= structure_.point_count()) {
      throw std::out_of_range("point " + std::to_string(p) +
                              " outside [0, " +
                              std::to_string(structure_.point_count()) + ")");
    }
  }

  IncidenceStructure structure_;
  std::uint32_t r_ = 0;
  std::uint32_t k_ = 0;
  std::vector<std::vector<LineIndex>> lines_through_;
  std::vector<std::vector<Point>> neighbors_;
  std::unordered_map<std::uint64_t, LineIndex> pair_line_;
};

inline Configuration as_configuration(IncidenceStructure structure) {
  return Configuration(std::move(structure));
}

/// True iff the given lines partition the point set.
inline bool is_parallel_class(const Configuration& config,
                              const std::vector<LineIndex>& line_subset) {
  std::vector<std::uint8_t> covered(config.v(), 0);
  for (LineIndex li : line_subset) {
    for (Point p : config.line(li)) {
      if (covered[p]) return false;
      covered[p] = 1;
    }
  }
  return std::all_of(covered.begin(), covered.end(),
                     [](std::uint8_t c) { return c == 1; });
}

}  // namespace upir
