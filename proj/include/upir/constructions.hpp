#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "upir/errors.hpp"
#include "upir/incidence.hpp"

namespace upir {

inline constexpr std::uint32_t kDefaultMaxPoints = 10000;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

/// A configuration together with a partition of its points into parts no
/// line crosses twice (TD groups, or an anonymity partition).
class GroupedConfiguration {
 public:
  GroupedConfiguration(Configuration config, std::vector<std::vector<Point>> groups)
      : config_(std::move(config)), groups_(std::move(groups)) {
    std::vector<std::uint8_t> seen(config_.v(), 0);
    for (auto& part : groups_) {
      if (part.empty()) throw PartitionError("empty group");
      if (!std::is_sorted(part.begin(), part.end())) {
        std::sort(part.begin(), part.end());
      }
      for (Point p : part) {
        if (p >= config_.v() || seen[p]) {
          throw PartitionError("groups do not partition the point set");
        }
        seen[p] = 1;
      }
      for (std::size_t a = 0; a < part.size(); ++a) {
        for (std::size_t b = a + 1; b < part.size(); ++b) {
          if (config_.collinear(part[a], part[b])) {
            throw PartitionError("group contains collinear pair (" +
                                 std::to_string(part[a]) + ", " +
                                 std::to_string(part[b]) + ")");
          }
        }
      }
    }
    if (!std::all_of(seen.begin(), seen.end(),
                     [](std::uint8_t s) { return s == 1; })) {
      throw PartitionError("groups do not cover the point set");
    }
    std::sort(groups_.begin(), groups_.end());
  }

  const Configuration& config() const { return config_; }
  const std::vector<std::vector<Point>>& groups() const { return groups_; }

 private:
  Configuration config_;
  std::vector<std::vector<Point>> groups_;
};

/// A resolution (or partial labeling): line indices split into classes,
/// each of which partitions the point set.
class ParallelClassLabeling {
 public:
  ParallelClassLabeling(const Configuration& config,
                        std::vector<std::vector<LineIndex>> classes)
      : classes_(std::move(classes)) {
    std::vector<std::uint8_t> seen(config.b(), 0);
    for (const auto& cls : classes_) {
      for (LineIndex li : cls) {
        if (li >= config.b() || seen[li]) {
          throw PartitionError("classes do not partition the line set");
        }
        seen[li] = 1;
      }
      if (!is_parallel_class(config, cls)) {
        throw PartitionError("class is not a parallel class");
      }
    }
  }

  const std::vector<std::vector<LineIndex>>& classes() const { return classes_; }

 private:
  std::vector<std::vector<LineIndex>> classes_;
};

struct AffinePlane {
  Configuration config;
  ParallelClassLabeling classes;  // q slope classes, then the vertical class
};

namespace detail {

/// Sorts lines lexicographically while tracking an integer label per line;
/// returns the canonical line list plus label-grouped indices.
inline std::pair<std::vector<Line>, std::vector<std::vector<LineIndex>>>
canonicalize_labeled(std::vector<std::pair<Line, std::uint32_t>> labeled,
                     std::uint32_t label_count) {
  std::sort(labeled.begin(), labeled.end());
  std::vector<Line> lines;
  lines.reserve(labeled.size());
  std::vector<std::vector<LineIndex>> by_label(label_count);
  for (LineIndex i = 0; i < labeled.size(); ++i) {
    by_label[labeled[i].second].push_back(i);
    lines.push_back(std::move(labeled[i].first));
  }
  return {std::move(lines), std::move(by_label)};
}

}  // namespace detail

/// AG(2,q) over the prime field: points (x,y) -> x*q+y, lines y=ax+b plus
/// verticals x=c, resolved into q+1 parallel classes indexed by slope
/// (class q holds the verticals).
inline AffinePlane affine_plane(std::uint32_t q,
                                std::uint32_t max_points = kDefaultMaxPoints) {
  if (!is_prime(q)) throw NotPrimeError(q);
  if (static_cast<std::uint64_t>(q) * q > max_points) {
    throw ResourceLimitError("affine plane of order " + std::to_string(q) +
                             " needs " + std::to_string(std::uint64_t(q) * q) +
                             " points, cap is " + std::to_string(max_points));
  }
  std::vector<std::pair<Line, std::uint32_t>> labeled;
  labeled.reserve(static_cast<std::size_t>(q) * q + q);
  for (std::uint32_t a = 0; a < q; ++a) {
    for (std::uint32_t b = 0; b < q; ++b) {
      Line line;
      line.reserve(q);
      for (std::uint32_t x = 0; x < q; ++x) {
        line.push_back(x * q + (a * x + b) % q);
      }
      std::sort(line.begin(), line.end());
      labeled.emplace_back(std::move(line), a);
    }
  }
  for (std::uint32_t c = 0; c < q; ++c) {
    Line line(q);
    std::iota(line.begin(), line.end(), c * q);
    labeled.emplace_back(std::move(line), q);
  }
  auto [lines, classes] = detail::canonicalize_labeled(std::move(labeled), q + 1);
  Configuration config{IncidenceStructure(q * q, std::move(lines))};
  ParallelClassLabeling labeling(config, std::move(classes));
  return AffinePlane{std::move(config), std::move(labeling)};
}

/// TD(k,n) from AG(2,n) with the vertical parallel class deleted and the
/// points restricted to its first k lines, which become the groups.
inline GroupedConfiguration transversal_design(
    std::uint32_t k, std::uint32_t n,
    std::uint32_t max_points = kDefaultMaxPoints) {
  if (k < 2 || k > n) {
    throw ParameterError("transversal design needs 2 <= k <= n, got k=" +
                         std::to_string(k) + ", n=" + std::to_string(n));
  }
  if (!is_prime(n)) throw NotPrimeError(n);
  if (static_cast<std::uint64_t>(k) * n > max_points) {
    throw ResourceLimitError("TD(" + std::to_string(k) + "," + std::to_string(n) +
                             ") exceeds the point cap of " +
                             std::to_string(max_points));
  }
  std::vector<Line> lines;
  lines.reserve(static_cast<std::size_t>(n) * n);
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = 0; b < n; ++b) {
      Line line;
      line.reserve(k);
      for (std::uint32_t x = 0; x < k; ++x) {
        line.push_back(x * n + (a * x + b) % n);
      }
      std::sort(line.begin(), line.end());
      lines.push_back(std::move(line));
    }
  }
  std::sort(lines.begin(), lines.end());
  Configuration config{IncidenceStructure(k * n, std::move(lines))};
  std::vector<std::vector<Point>> groups(k);
  for (std::uint32_t c = 0; c < k; ++c) {
    groups[c].resize(n);
    std::iota(groups[c].begin(), groups[c].end(), c * n);
  }
  return GroupedConfiguration(std::move(config), std::move(groups));
}

/// The projective plane of order 2: the smallest linear space with r=k=3.
inline Configuration fano_plane() {
  std::vector<Line> lines = {{0, 1, 2}, {0, 3, 4}, {0, 5, 6}, {1, 3, 5},
                             {1, 4, 6}, {2, 3, 6}, {2, 4, 5}};
  return Configuration{IncidenceStructure(7, std::move(lines))};
}

/// A (36,72,6,3)-configuration with 3-anonymous neighborhoods that is not
/// a transversal design. Hardcoded line set (zero-based).
inline Configuration example_36() {
  static constexpr std::array<std::array<std::uint32_t, 3>, 72> table = {{
      {1, 4, 7},    {1, 5, 8},    {1, 6, 9},    {2, 4, 8},    {2, 5, 9},
      {2, 6, 7},    {3, 4, 9},    {3, 5, 7},    {3, 6, 8},    {1, 10, 13},
      {1, 11, 14},  {1, 12, 15},  {2, 10, 14},  {2, 11, 15},  {2, 12, 13},
      {3, 10, 15},  {3, 11, 13},  {3, 12, 14},  {4, 16, 19},  {4, 17, 20},
      {4, 18, 21},  {5, 16, 20},  {5, 17, 21},  {5, 18, 19},  {6, 16, 21},
      {6, 17, 19},  {6, 18, 20},  {7, 22, 25},  {7, 23, 26},  {7, 24, 27},
      {8, 22, 26},  {8, 23, 27},  {8, 24, 25},  {9, 22, 27},  {9, 23, 25},
      {9, 24, 26},  {10, 28, 31}, {10, 29, 32}, {10, 30, 33}, {11, 28, 32},
      {11, 29, 33}, {11, 30, 31}, {12, 28, 33}, {12, 29, 31}, {12, 30, 32},
      {13, 16, 34}, {13, 17, 35}, {13, 18, 36}, {14, 16, 35}, {14, 17, 36},
      {14, 18, 34}, {15, 16, 36}, {15, 17, 34}, {15, 18, 35}, {19, 22, 31},
      {19, 23, 32}, {19, 24, 33}, {20, 22, 32}, {20, 23, 33}, {20, 24, 31},
      {21, 22, 33}, {21, 23, 31}, {21, 24, 32}, {25, 28, 34}, {25, 29, 35},
      {25, 30, 36}, {26, 28, 35}, {26, 29, 36}, {26, 30, 34}, {27, 28, 36},
      {27, 29, 34}, {27, 30, 35},
  }};
  std::vector<Line> lines;
  lines.reserve(table.size());
  for (const auto& row : table) {
    lines.push_back({row[0] - 1, row[1] - 1, row[2] - 1});
  }
  std::sort(lines.begin(), lines.end());
  return Configuration{IncidenceStructure(36, std::move(lines))};
}

/// The v-cycle as a (v,v,2,2)-configuration.
inline Configuration cycle(std::uint32_t v) {
  if (v < 3) throw ParameterError("cycle needs v >= 3, got " + std::to_string(v));
  std::vector<Line> lines;
  lines.reserve(v);
  for (std::uint32_t i = 0; i + 1 < v; ++i) lines.push_back({i, i + 1});
  lines.push_back({0, v - 1});
  std::sort(lines.begin(), lines.end());
  return Configuration{IncidenceStructure(v, std::move(lines))};
}

inline Configuration pentagon() { return cycle(5); }

namespace detail {

inline std::vector<std::vector<Point>> neighborhood_partition(
    const Configuration& config) {
  std::map<std::vector<Point>, std::vector<Point>> by_neighborhood;
  for (Point p = 0; p < config.v(); ++p) {
    by_neighborhood[config.neighborhood(p)].push_back(p);
  }
  std::vector<std::vector<Point>> parts;
  parts.reserve(by_neighborhood.size());
  for (auto& [nb, part] : by_neighborhood) parts.push_back(std::move(part));
  std::sort(parts.begin(), parts.end());
  return parts;
}

}  // namespace detail

/// Adds, per anonymity part g, |g|/k lines partitioning g (consecutive runs
/// of the sorted part). Input groups must be the neighborhood-anonymity
/// partition and every part size must be divisible by k. The result is a
/// (v, b + sum |g|/k, r+1, k)-configuration; points sharing a new line share
/// their closed neighborhood in it.
inline Configuration extend_to_closed_anonymous(const GroupedConfiguration& gc) {
  const Configuration& config = gc.config();
  if (detail::neighborhood_partition(config) != gc.groups()) {
    throw PartitionError(
        "groups are not the neighborhood-anonymity partition");
  }
  const std::uint32_t k = config.k();
  std::vector<Line> lines = config.lines();
  for (const auto& part : gc.groups()) {
    if (part.size() % k != 0) {
      throw DivisibilityError("part of size " + std::to_string(part.size()) +
                              " is not divisible by k=" + std::to_string(k));
    }
    for (std::size_t start = 0; start < part.size(); start += k) {
      lines.emplace_back(part.begin() + start, part.begin() + start + k);
    }
  }
  std::sort(lines.begin(), lines.end());
  return Configuration{IncidenceStructure(config.v(), std::move(lines))};
}

}  // namespace upir
