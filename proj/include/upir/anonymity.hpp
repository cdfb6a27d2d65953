#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "upir/constructions.hpp"
#include "upir/errors.hpp"
#include "upir/incidence.hpp"

namespace upir {

enum class NeighborhoodMode { Open, Closed };

inline const char* to_string(NeighborhoodMode mode) {
  return mode == NeighborhoodMode::Open ? "open" : "closed";
}

/// Equivalence classes of "same neighborhood" (Open) or "same closed
/// neighborhood" (Closed). Parts and their members are sorted ascending;
/// level is the smallest part size.
struct AnonymityPartition {
  NeighborhoodMode mode;
  std::vector<std::vector<Point>> parts;
  std::size_t level;
};

inline AnonymityPartition anonymity_partition(const Configuration& config,
                                              NeighborhoodMode mode) {
  std::map<std::vector<Point>, std::vector<Point>> classes;
  for (Point p = 0; p < config.v(); ++p) {
    if (mode == NeighborhoodMode::Open) {
      classes[config.neighborhood(p)].push_back(p);
    } else {
      classes[config.closed_neighborhood(p)].push_back(p);
    }
  }
  AnonymityPartition partition{mode, {}, 0};
  partition.parts.reserve(classes.size());
  for (auto& [nb, part] : classes) partition.parts.push_back(std::move(part));
  std::sort(partition.parts.begin(), partition.parts.end());
  partition.level = config.v() == 0 ? 0 : partition.parts.front().size();
  for (const auto& part : partition.parts) {
    partition.level = std::min(partition.level, part.size());
  }
  return partition;
}

inline bool has_unique_neighborhoods(const Configuration& config,
                                     NeighborhoodMode mode) {
  const auto partition = anonymity_partition(config, mode);
  return std::all_of(partition.parts.begin(), partition.parts.end(),
                     [](const auto& part) { return part.size() == 1; });
}

/// A triangle is three points pairwise collinear on three distinct lines;
/// three collinear points on one line do not count.
inline bool is_triangle_free(const Configuration& config) {
  for (Point p = 0; p < config.v(); ++p) {
    const auto& nb = config.neighborhood(p);
    for (std::size_t a = 0; a < nb.size(); ++a) {
      for (std::size_t b = a + 1; b < nb.size(); ++b) {
        if (nb[a] <= p || nb[b] <= p) continue;  // count each triple once
        if (!config.collinear(nb[a], nb[b])) continue;
        if (config.line_through(p, nb[a]) != config.line_through(p, nb[b])) {
          return false;
        }
      }
    }
  }
  return true;
}

struct PentagonalReport {
  bool is_pentagonal = false;
  /// Per point, the line holding exactly the complement of CN(p), if any.
  std::vector<std::optional<LineIndex>> opposite_line;
  /// Pairs of lines that are mutually opposite, each stored (low, high).
  std::vector<std::pair<LineIndex, LineIndex>> opposite_line_pairs;
};

inline PentagonalReport pentagonal_report(const Configuration& config) {
  std::map<Line, LineIndex> line_index;
  for (LineIndex li = 0; li < config.b(); ++li) line_index.emplace(config.line(li), li);

  PentagonalReport report;
  report.opposite_line.assign(config.v(), std::nullopt);
  report.is_pentagonal = true;
  for (Point p = 0; p < config.v(); ++p) {
    const auto cn = config.closed_neighborhood(p);
    Line complement;
    complement.reserve(config.v() - cn.size());
    auto it = cn.begin();
    for (Point q = 0; q < config.v(); ++q) {
      if (it != cn.end() && *it == q) {
        ++it;
      } else {
        complement.push_back(q);
      }
    }
    auto found = line_index.find(complement);
    if (found != line_index.end()) {
      report.opposite_line[p] = found->second;
    } else {
      report.is_pentagonal = false;
    }
  }

  // l and l' pair up when every point of each has the other as opposite.
  auto common_opposite = [&](LineIndex li) -> std::optional<LineIndex> {
    std::optional<LineIndex> opp;
    for (Point p : config.line(li)) {
      if (!report.opposite_line[p]) return std::nullopt;
      if (opp && *opp != *report.opposite_line[p]) return std::nullopt;
      opp = report.opposite_line[p];
    }
    return opp;
  };
  for (LineIndex li = 0; li < config.b(); ++li) {
    auto opp = common_opposite(li);
    if (!opp || *opp <= li) continue;
    if (common_opposite(*opp) == li) {
      report.opposite_line_pairs.emplace_back(li, *opp);
    }
  }
  return report;
}

/// Facts behind the characterization of n-anonymous neighborhoods: the
/// anonymity parts are non-collinear sets of size >= n, r >= n, and the
/// number of parts m >= k, with the equality cases flagged.
struct CharacterizationReport {
  std::size_t level = 0;       // n
  std::size_t part_count = 0;  // m
  std::uint32_t r = 0;
  std::uint32_t k = 0;
  bool parts_noncollinear = false;
  bool r_at_least_level = false;
  bool parts_at_least_k = false;
  bool r_equals_level = false;
  bool parts_equal_k = false;
};

inline CharacterizationReport check_characterization(const Configuration& config) {
  const auto partition = anonymity_partition(config, NeighborhoodMode::Open);
  if (partition.level < 2) {
    throw PreconditionError(
        "characterization needs open anonymity level >= 2, got " +
        std::to_string(partition.level));
  }
  CharacterizationReport report;
  report.level = partition.level;
  report.part_count = partition.parts.size();
  report.r = config.r();
  report.k = config.k();
  report.parts_noncollinear = true;
  for (const auto& part : partition.parts) {
    for (std::size_t a = 0; a < part.size() && report.parts_noncollinear; ++a) {
      for (std::size_t b = a + 1; b < part.size(); ++b) {
        if (config.collinear(part[a], part[b])) {
          report.parts_noncollinear = false;
          break;
        }
      }
    }
  }
  report.r_at_least_level = report.r >= report.level;
  report.parts_at_least_k = report.part_count >= report.k;
  report.r_equals_level = report.r == report.level;
  report.parts_equal_k = report.part_count == report.k;
  return report;
}

/// Recognizes transversal designs: equal-size anonymity parts, as many
/// parts as points per line, r = n, and the TD axioms verified directly.
inline std::optional<GroupedConfiguration> is_transversal_design(
    const Configuration& config) {
  const auto partition = anonymity_partition(config, NeighborhoodMode::Open);
  const std::size_t n = partition.level;
  if (n < 1) return std::nullopt;
  for (const auto& part : partition.parts) {
    if (part.size() != n) return std::nullopt;
  }
  if (partition.parts.size() != config.k()) return std::nullopt;
  if (config.r() != n) return std::nullopt;

  // Axiom 1: every group meets every line exactly once.
  std::vector<std::size_t> part_of(config.v());
  for (std::size_t g = 0; g < partition.parts.size(); ++g) {
    for (Point p : partition.parts[g]) part_of[p] = g;
  }
  for (LineIndex li = 0; li < config.b(); ++li) {
    std::vector<std::uint8_t> hit(partition.parts.size(), 0);
    for (Point p : config.line(li)) {
      if (hit[part_of[p]]) return std::nullopt;
      hit[part_of[p]] = 1;
    }
  }
  // Axiom 2 with lambda=1: cross-group pairs collinear exactly once. The
  // partial-linear-space axiom gives "at most once"; check "at least".
  for (Point p = 0; p < config.v(); ++p) {
    for (Point q = p + 1; q < config.v(); ++q) {
      if (part_of[p] != part_of[q] && !config.collinear(p, q)) {
        return std::nullopt;
      }
    }
  }
  return GroupedConfiguration(config, partition.parts);
}

/// The intersection of the (closed) neighborhoods over N(owner) (resp.
/// CN(owner)): what a curious server can still not split after seeing every
/// possible proxy. Always contains the owner's anonymity part.
inline std::vector<Point> structural_anonymity_set(const Configuration& config,
                                                   Point owner,
                                                   NeighborhoodMode mode) {
  const std::vector<Point> seeds = mode == NeighborhoodMode::Open
                                       ? config.neighborhood(owner)
                                       : config.closed_neighborhood(owner);
  std::vector<Point> result;
  bool first = true;
  for (Point p : seeds) {
    std::vector<Point> nb = mode == NeighborhoodMode::Open
                                ? config.neighborhood(p)
                                : config.closed_neighborhood(p);
    if (first) {
      result = std::move(nb);
      first = false;
    } else {
      std::vector<Point> merged;
      std::set_intersection(result.begin(), result.end(), nb.begin(), nb.end(),
                            std::back_inserter(merged));
      result = std::move(merged);
    }
  }
  return result;
}

}  // namespace upir
