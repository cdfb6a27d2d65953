#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "upir/errors.hpp"
#include "upir/incidence.hpp"
#include "upir/random.hpp"

namespace upir {

enum class Protocol { Upir1, Upir2 };

inline const char* to_string(Protocol protocol) {
  return protocol == Protocol::Upir1 ? "upir1" : "upir2";
}

enum class MessageKind { Query, Answer };

struct Message {
  MessageKind kind;
  std::string query_id;
  Point owner;      // ground truth; never exposed to the server view
  Point addressee;  // queries only; a point on the carrying line
  std::string payload;
  std::uint32_t visible_from = 0;  // step at which readers first see it
};

/// Per-user emission mixture: a fixed rare query reissued with probability
/// `rare` per activation, else a fresh one-off with probability `background`.
struct UserQuerySpec {
  double rare = 0.0;
  double background = 0.0;
};

class QueryModel {
 public:
  QueryModel() = default;

  QueryModel(UserQuerySpec default_spec, std::map<Point, UserQuerySpec> overrides)
      : default_spec_(default_spec), overrides_(std::move(overrides)) {
    check(default_spec_);
    for (const auto& [p, spec] : overrides_) check(spec);
  }

  static QueryModel uniform_background(double background) {
    return QueryModel(UserQuerySpec{0.0, background}, {});
  }

  /// One user reissues its rare query on every activation; everyone else
  /// emits one-off background noise at the given rate.
  static QueryModel heavy_repeater(Point owner, double background_for_others = 0.0) {
    return QueryModel(UserQuerySpec{0.0, background_for_others},
                      {{owner, UserQuerySpec{1.0, 0.0}}});
  }

  const UserQuerySpec& spec_for(Point p) const {
    auto it = overrides_.find(p);
    return it == overrides_.end() ? default_spec_ : it->second;
  }

  const UserQuerySpec& default_spec() const { return default_spec_; }
  const std::map<Point, UserQuerySpec>& overrides() const { return overrides_; }

  static std::string rare_query_id(Point p) {
    return "u" + std::to_string(p) + "-rare";
  }

 private:
  static void check(const UserQuerySpec& spec) {
    if (spec.rare < 0.0 || spec.rare > 1.0 || spec.background < 0.0 ||
        spec.background > 1.0 || spec.rare + spec.background > 1.0) {
      throw std::invalid_argument(
          "query probabilities must lie in [0,1] and sum to at most 1");
    }
  }

  UserQuerySpec default_spec_;
  std::map<Point, UserQuerySpec> overrides_;
};

/// One RP event: a query posted to a communication space.
struct PostRecord {
  std::uint64_t seq;
  std::uint32_t step;
  Point owner;
  std::string query_id;
  LineIndex line;
};

/// One AP event: a proxy forwarding a query to the server.
struct ForwardRecord {
  std::uint64_t seq;
  std::uint32_t step;
  Point proxy;
  std::string query_id;
  LineIndex line;
};

struct TraceParams {
  Protocol protocol = Protocol::Upir1;
  double self_submission = 0.0;
  std::uint32_t steps = 0;
  std::uint64_t seed = 0;
  Point v = 0;
  std::uint32_t b = 0;
  std::uint32_t r = 0;
  std::uint32_t k = 0;
};

struct SimulationTrace {
  TraceParams params;
  std::vector<PostRecord> truth_log;     // RP_t(P), server-invisible
  std::vector<ForwardRecord> server_log; // AP_t(P), the server's view

  std::optional<Point> owner_of(const std::string& query_id) const {
    for (const auto& rec : truth_log) {
      if (rec.query_id == query_id) return rec.owner;
    }
    return std::nullopt;
  }
};

/// Prop 4's calibrated self-submission, 1/(r(k-1)+1) = 1/|CN(p)|.
inline double auto_self_submission(const Configuration& config) {
  return 1.0 / (config.r() * (config.k() - 1) + 1.0);
}

/// Users mapped onto the points of a configuration, one message queue per
/// line. All state needed to replay a run deterministically from its seed.
class Community {
 public:
  Community(Configuration config, QueryModel model, std::uint64_t seed)
      : config_(std::move(config)),
        model_(std::move(model)),
        scheduler_rng_(derive_seed(seed, 0)),
        current_step_(1) {
    spaces_.assign(config_.b(), {});
    user_rngs_.reserve(config_.v());
    for (Point p = 0; p < config_.v(); ++p) {
      user_rngs_.emplace_back(derive_seed(seed, 1 + p));
    }
    oneoff_counter_.assign(config_.v(), 0);
    trace_.params.seed = seed;
    trace_.params.v = config_.v();
    trace_.params.b = config_.b();
    trace_.params.r = config_.r();
    trace_.params.k = config_.k();
  }

  const Configuration& config() const { return config_; }
  const QueryModel& model() const { return model_; }
  const std::vector<Message>& space(LineIndex line) const { return spaces_.at(line); }
  const SimulationTrace& trace() const { return trace_; }
  std::uint32_t current_step() const { return current_step_; }

  std::size_t queued_queries() const {
    std::size_t n = 0;
    for (const auto& space : spaces_) {
      for (const auto& msg : space) {
        if (msg.kind == MessageKind::Query) ++n;
      }
    }
    return n;
  }

  std::size_t queued_messages() const {
    std::size_t n = 0;
    for (const auto& space : spaces_) n += space.size();
    return n;
  }

  /// One activation of `user`: read a random line, forward queries addressed
  /// to the user, collect own answers, then maybe post a query. With x > 0
  /// the user self-addresses with probability x (P2P UPIR 2, step 3(a')).
  void activate(Point user, double x) {
    if (x < 0.0 || x > 1.0) {
      throw ParameterError("self-submission must lie in [0,1], got " +
                           std::to_string(x));
    }
    Rng& rng = user_rng(user);
    const auto& through = config_.lines_through(user);
    const LineIndex li = through[rng.below(static_cast<std::uint32_t>(through.size()))];
    const Line& line_points = config_.line(li);

    // Process the queue in order. Messages written during the current step
    // stay invisible until the next one, so a query travels at least one
    // step before its proxy can forward it.
    std::vector<Message>& space = spaces_[li];
    std::vector<Message> kept;
    std::vector<Message> answers;
    kept.reserve(space.size());
    for (Message& msg : space) {
      if (msg.visible_from > current_step_) {
        kept.push_back(std::move(msg));
      } else if (msg.kind == MessageKind::Query && msg.addressee == user) {
        trace_.server_log.push_back(
            {next_seq_++, current_step_, user, msg.query_id, li});
        answers.push_back(Message{MessageKind::Answer, msg.query_id, msg.owner,
                                  msg.owner, "ans:" + msg.query_id,
                                  current_step_ + 1});
      } else if (msg.kind == MessageKind::Answer && msg.owner == user) {
        // consumed
      } else {
        kept.push_back(std::move(msg));
      }
    }
    for (Message& a : answers) kept.push_back(std::move(a));
    space = std::move(kept);

    const UserQuerySpec& spec = model_.spec_for(user);
    const double draw = rng.unit();
    std::optional<std::string> query_id;
    if (draw < spec.rare) {
      query_id = QueryModel::rare_query_id(user);
    } else if (draw < spec.rare + spec.background) {
      query_id = "u" + std::to_string(user) + "-q" +
                 std::to_string(++oneoff_counter_[user]);
    }
    if (query_id) {
      Point addressee;
      if (x > 0.0 && rng.unit() < x) {
        addressee = user;
      } else {
        std::uint32_t pick =
            rng.below(static_cast<std::uint32_t>(line_points.size() - 1));
        std::uint32_t seen = 0;
        addressee = user;
        for (Point q : line_points) {
          if (q == user) continue;
          if (seen++ == pick) {
            addressee = q;
            break;
          }
        }
      }
      space.push_back(Message{MessageKind::Query, *query_id, user, addressee,
                              "", current_step_ + 1});
      trace_.truth_log.push_back(
          {next_seq_++, current_step_, user, *query_id, li});
    }
  }

  void advance_step() { ++current_step_; }

  Rng& user_rng(Point p) {
    if (p >= user_rngs_.size()) {
      throw std::out_of_range("user " + std::to_string(p) + " outside [0, " +
                              std::to_string(user_rngs_.size()) + ")");
    }
    return user_rngs_[p];
  }

  Rng& scheduler_rng() { return scheduler_rng_; }

  SimulationTrace& mutable_trace() { return trace_; }

 private:
  Configuration config_;
  QueryModel model_;
  std::vector<std::vector<Message>> spaces_;
  std::vector<Rng> user_rngs_;
  Rng scheduler_rng_;
  std::vector<std::uint64_t> oneoff_counter_;
  std::uint64_t next_seq_ = 0;
  std::uint32_t current_step_;
  SimulationTrace trace_;
};

inline Community init_community(const Configuration& config,
                                const QueryModel& model, std::uint64_t seed) {
  return Community(config, model, seed);
}

inline void step_upir1(Community& community, Point user) {
  community.activate(user, 0.0);
}

inline void step_upir2(Community& community, Point user, double x) {
  community.activate(user, x);
}

/// Runs `steps` global rounds; each round activates every user once in a
/// seeded shuffled order. Returns the accumulated trace.
inline const SimulationTrace& run(
    Community& community, Protocol protocol, std::uint32_t steps,
    std::optional<double> self_submission = std::nullopt) {
  if (steps < 1) throw ParameterError("steps must be >= 1");
  double x = 0.0;
  if (protocol == Protocol::Upir2) {
    x = self_submission.value_or(auto_self_submission(community.config()));
    if (x < 0.0 || x > 1.0) {
      throw ParameterError("self-submission must lie in [0,1]");
    }
  }
  std::vector<Point> order(community.config().v());
  std::iota(order.begin(), order.end(), 0);
  for (std::uint32_t s = 0; s < steps; ++s) {
    community.scheduler_rng().shuffle(order);
    for (Point user : order) community.activate(user, x);
    community.advance_step();
  }
  SimulationTrace& trace = community.mutable_trace();
  trace.params.protocol = protocol;
  trace.params.self_submission = x;
  trace.params.steps += steps;
  return trace;
}

/// Empirical proxy counts over the forwarded queries owned by `owner`.
struct ProxyDistribution {
  std::map<Point, std::size_t> counts;
  std::size_t total = 0;

  double frequency(Point p) const {
    auto it = counts.find(p);
    return total == 0 ? 0.0
                      : static_cast<double>(it == counts.end() ? 0 : it->second) /
                            static_cast<double>(total);
  }
};

inline ProxyDistribution proxy_distribution(const SimulationTrace& trace,
                                            Point owner) {
  std::map<std::string, Point> owner_by_query;
  for (const auto& rec : trace.truth_log) {
    owner_by_query.emplace(rec.query_id, rec.owner);
  }
  ProxyDistribution dist;
  for (const auto& rec : trace.server_log) {
    auto it = owner_by_query.find(rec.query_id);
    if (it != owner_by_query.end() && it->second == owner) {
      ++dist.counts[rec.proxy];
      ++dist.total;
    }
  }
  if (dist.total == 0) {
    throw NoDataError("owner " + std::to_string(owner) +
                      " has no forwarded query in the trace");
  }
  return dist;
}

}  // namespace upir
