#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "upir/anonymity.hpp"
#include "upir/errors.hpp"
#include "upir/incidence.hpp"
#include "upir/protocol.hpp"

namespace upir {

/// Outcome of intersecting the (closed) neighborhoods of the proxies seen
/// for one linked query. true_owner and structural_bound are evaluation
/// extras the adversary would not have.
struct AttackReport {
  NeighborhoodMode mode = NeighborhoodMode::Open;
  std::string query_id;
  std::vector<Point> observed_proxies;
  std::vector<Point> candidate_set;
  Point true_owner = 0;
  bool owner_in_candidates = false;
  std::vector<Point> structural_bound;
  std::size_t confusion_achieved = 0;
};

struct AttackOptions {
  /// When set, only these colluding proxies report their observations.
  std::optional<std::vector<Point>> observers;
};

/// The anonymity set left by a single observed proxy: N(proxy) under
/// UPIR 1 semantics, CN(proxy) under UPIR 2.
inline std::vector<Point> single_query_anonymity(const Configuration& config,
                                                 Point proxy,
                                                 NeighborhoodMode mode) {
  return mode == NeighborhoodMode::Open ? config.neighborhood(proxy)
                                        : config.closed_neighborhood(proxy);
}

namespace detail {

inline std::vector<Point> all_points(const Configuration& config) {
  std::vector<Point> points(config.v());
  for (Point p = 0; p < config.v(); ++p) points[p] = p;
  return points;
}

inline void intersect_into(std::vector<Point>& accumulator,
                           const std::vector<Point>& other) {
  std::vector<Point> merged;
  std::set_intersection(accumulator.begin(), accumulator.end(), other.begin(),
                        other.end(), std::back_inserter(merged));
  accumulator = std::move(merged);
}

}  // namespace detail

inline AttackReport intersection_attack(const Configuration& config,
                                        const SimulationTrace& trace,
                                        const std::string& query_id,
                                        NeighborhoodMode mode,
                                        const AttackOptions& options = {}) {
  std::set<Point> observers;
  if (options.observers) {
    observers.insert(options.observers->begin(), options.observers->end());
  }

  AttackReport report;
  report.mode = mode;
  report.query_id = query_id;
  report.candidate_set = detail::all_points(config);
  std::set<Point> seen;
  for (const auto& rec : trace.server_log) {
    if (rec.query_id != query_id) continue;
    if (options.observers && observers.count(rec.proxy) == 0) continue;
    if (!seen.insert(rec.proxy).second) continue;
    detail::intersect_into(report.candidate_set,
                           single_query_anonymity(config, rec.proxy, mode));
  }
  if (seen.empty()) {
    throw UnknownQueryError("query '" + query_id +
                            "' was never forwarded by an observed proxy");
  }
  report.observed_proxies.assign(seen.begin(), seen.end());

  auto owner = trace.owner_of(query_id);
  if (!owner) {
    throw UnknownQueryError("query '" + query_id + "' has no issuer in the trace");
  }
  report.true_owner = *owner;
  report.owner_in_candidates =
      std::binary_search(report.candidate_set.begin(),
                         report.candidate_set.end(), *owner);
  report.structural_bound = structural_anonymity_set(config, *owner, mode);
  report.confusion_achieved = report.candidate_set.size();
  return report;
}

/// The guaranteed worst-case confusion for linkable query sequences: the
/// anonymity level of the partition the protocol's attack intersects down
/// to. A certificate of 1 means the configuration is attackable.
inline std::size_t confusion_certificate(const Configuration& config,
                                         Protocol protocol) {
  const NeighborhoodMode mode = protocol == Protocol::Upir1
                                    ? NeighborhoodMode::Open
                                    : NeighborhoodMode::Closed;
  return anonymity_partition(config, mode).level;
}

struct AttackStep {
  std::size_t observation_index;  // 0-based count of distinct proxies so far
  std::uint32_t step;             // simulation step of the observation
  AttackReport report;
};

struct AttackRun {
  std::uint32_t steps_used = 0;
  std::vector<AttackStep> trajectory;
  AttackReport terminal;
};

/// 10x the coupon-collector cover time of a neighborhood, in steps.
inline std::uint32_t default_patience(const Configuration& config) {
  const std::uint32_t m = config.r() * (config.k() - 1);
  double harmonic = 0.0;
  for (std::uint32_t i = 1; i <= m; ++i) harmonic += 1.0 / i;
  return 10 * static_cast<std::uint32_t>(std::ceil(m * harmonic));
}

struct LiveAttackOptions {
  std::optional<std::uint32_t> patience;
  std::optional<double> self_submission;
  double background_for_others = 0.0;
};

/// Simulates a community whose victim repeats one rare query every step and
/// replays the server log through the intersection attack, recording the
/// candidate set after each new proxy. Stops once the candidate set has not
/// shrunk for a patience window (or at max_steps).
inline AttackRun attack_until_identified(const Configuration& config,
                                         Protocol protocol, Point owner,
                                         std::uint32_t max_steps,
                                         std::uint64_t seed,
                                         const LiveAttackOptions& options = {}) {
  if (owner >= config.v()) {
    throw std::out_of_range("owner " + std::to_string(owner) + " outside [0, " +
                            std::to_string(config.v()) + ")");
  }
  const NeighborhoodMode mode = protocol == Protocol::Upir1
                                    ? NeighborhoodMode::Open
                                    : NeighborhoodMode::Closed;
  const std::uint32_t patience =
      options.patience.value_or(default_patience(config));
  const std::string query_id = QueryModel::rare_query_id(owner);

  Community community(
      config, QueryModel::heavy_repeater(owner, options.background_for_others),
      seed);
  const SimulationTrace& trace =
      run(community, protocol, max_steps, options.self_submission);

  AttackRun result;
  AttackReport current;
  current.mode = mode;
  current.query_id = query_id;
  current.candidate_set = detail::all_points(config);
  current.true_owner = owner;
  current.structural_bound = structural_anonymity_set(config, owner, mode);
  current.owner_in_candidates = true;
  current.confusion_achieved = current.candidate_set.size();

  std::set<Point> seen;
  std::uint32_t last_shrink_step = 0;
  std::uint32_t stop_step = std::min(max_steps, patience);
  for (const auto& rec : trace.server_log) {
    if (rec.query_id != query_id) continue;
    if (rec.step > stop_step) break;
    if (!seen.insert(rec.proxy).second) continue;

    const std::size_t before = current.candidate_set.size();
    detail::intersect_into(current.candidate_set,
                           single_query_anonymity(config, rec.proxy, mode));
    current.observed_proxies.assign(seen.begin(), seen.end());
    current.owner_in_candidates =
        std::binary_search(current.candidate_set.begin(),
                           current.candidate_set.end(), owner);
    current.confusion_achieved = current.candidate_set.size();
    result.trajectory.push_back(
        {result.trajectory.size(), rec.step, current});
    if (current.candidate_set.size() < before) {
      last_shrink_step = rec.step;
      stop_step = std::min(max_steps, last_shrink_step + patience);
    }
  }
  result.steps_used = stop_step;
  result.terminal = current;
  return result;
}

}  // namespace upir
