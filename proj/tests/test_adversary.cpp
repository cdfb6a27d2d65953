#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "support/zoo.hpp"
#include "upir/adversary.hpp"
#include "upir/constructions.hpp"

using namespace upir;

namespace {

SimulationTrace heavy_trace(const Configuration& config, Protocol protocol,
                            Point owner, std::uint32_t steps, std::uint64_t seed) {
  Community community(config, QueryModel::heavy_repeater(owner), seed);
  return run(community, protocol, steps);
}

}  // namespace

TEST_CASE("single query anonymity is the proxy's (closed) neighborhood") {
  auto fano = fano_plane();
  CHECK(single_query_anonymity(fano, 2, NeighborhoodMode::Open).size() == 6);
  CHECK(single_query_anonymity(example_36(), 0, NeighborhoodMode::Open).size() == 12);
  CHECK(single_query_anonymity(cycle(4), 1, NeighborhoodMode::Closed).size() == 3);
  CHECK_THROWS_AS(single_query_anonymity(fano, 9, NeighborhoodMode::Open),
                  std::out_of_range);
}

TEST_CASE("confusion certificates") {
  CHECK(confusion_certificate(fano_plane(), Protocol::Upir1) == 1);
  CHECK(confusion_certificate(fano_plane(), Protocol::Upir2) == 7);
  CHECK(confusion_certificate(example_36(), Protocol::Upir1) == 3);
  CHECK(confusion_certificate(transversal_design(3, 3).config(),
                              Protocol::Upir1) == 3);

  for (const auto& member : zoo::all()) {
    INFO(member.name);
    CHECK(confusion_certificate(member.config, Protocol::Upir1) ==
          anonymity_partition(member.config, NeighborhoodMode::Open).level);
    CHECK(confusion_certificate(member.config, Protocol::Upir2) ==
          anonymity_partition(member.config, NeighborhoodMode::Closed).level);
  }
}

TEST_CASE("intersection attack on a Fano upir1 trace identifies the owner") {
  auto config = fano_plane();
  auto trace = heavy_trace(config, Protocol::Upir1, 0, 3000, 17);
  auto report = intersection_attack(config, trace, QueryModel::rare_query_id(0),
                                    NeighborhoodMode::Open);
  const auto& nb = config.neighborhood(0);
  REQUIRE(report.observed_proxies == nb);  // full coverage after 3000 steps
  CHECK(report.candidate_set == std::vector<Point>{0});
  CHECK(report.confusion_achieved == 1);
  CHECK(report.owner_in_candidates);
  CHECK(report.true_owner == 0);
  // at convergence the attack meets the structural bound exactly
  CHECK(report.candidate_set ==
        structural_anonymity_set(config, 0, NeighborhoodMode::Open));
}

TEST_CASE("intersection attack on TD(3,3) bottoms out at the group") {
  auto td = transversal_design(3, 3);
  auto trace = heavy_trace(td.config(), Protocol::Upir1, 0, 3000, 29);
  auto report = intersection_attack(td.config(), trace,
                                    QueryModel::rare_query_id(0),
                                    NeighborhoodMode::Open);
  CHECK(report.candidate_set == td.groups()[0]);
  CHECK(report.confusion_achieved == 3);
  CHECK(report.owner_in_candidates);
}

TEST_CASE("intersection attack on Fano upir2 stays fully confused") {
  auto config = fano_plane();
  auto trace = heavy_trace(config, Protocol::Upir2, 0, 3000, 41);
  auto report = intersection_attack(config, trace, QueryModel::rare_query_id(0),
                                    NeighborhoodMode::Closed);
  CHECK(report.candidate_set == std::vector<Point>{0, 1, 2, 3, 4, 5, 6});
  CHECK(report.confusion_achieved == 7);
}

TEST_CASE("unknown queries are rejected") {
  auto config = fano_plane();
  auto trace = heavy_trace(config, Protocol::Upir1, 0, 50, 3);
  CHECK_THROWS_AS(intersection_attack(config, trace, "nope",
                                      NeighborhoodMode::Open),
                  UnknownQueryError);
}

TEST_CASE("colluding-proxy mode restricts the observations") {
  auto config = fano_plane();
  auto trace = heavy_trace(config, Protocol::Upir1, 0, 3000, 17);
  AttackOptions options;
  options.observers = std::vector<Point>{1, 2};
  auto report = intersection_attack(config, trace, QueryModel::rare_query_id(0),
                                    NeighborhoodMode::Open, options);
  CHECK(report.observed_proxies == std::vector<Point>{1, 2});
  // N(1) and N(2) in a linear space exclude only the proxies themselves
  CHECK(report.candidate_set == std::vector<Point>{0, 3, 4, 5, 6});
  CHECK(report.owner_in_candidates);
}

TEST_CASE("live attack on Fano upir1 converges to the owner") {
  auto config = fano_plane();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto result = attack_until_identified(config, Protocol::Upir1, 0, 500, seed);
    INFO("seed " << seed);
    CHECK(result.terminal.confusion_achieved == 1);
    CHECK(result.terminal.candidate_set == std::vector<Point>{0});
    CHECK(result.terminal.owner_in_candidates);
    CHECK(result.steps_used <= 500);

    // anti-monotone candidate sets, owner present at every stage
    for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
      const auto& report = result.trajectory[i].report;
      CHECK(report.owner_in_candidates);
      CHECK(std::includes(report.candidate_set.begin(), report.candidate_set.end(),
                          report.structural_bound.begin(),
                          report.structural_bound.end()));
      if (i > 0) {
        const auto& prev = result.trajectory[i - 1].report.candidate_set;
        CHECK(std::includes(prev.begin(), prev.end(),
                            report.candidate_set.begin(),
                            report.candidate_set.end()));
      }
    }
  }
}

TEST_CASE("live attack on TD(3,3) terminates at confusion exactly 3") {
  auto td = transversal_design(3, 3);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto result = attack_until_identified(td.config(), Protocol::Upir1, 4, 500, seed);
    INFO("seed " << seed);
    CHECK(result.terminal.confusion_achieved == 3);
    CHECK(result.terminal.candidate_set == td.groups()[1]);
    CHECK(result.terminal.owner_in_candidates);
  }
}

TEST_CASE("live attack on Fano upir2 stays at confusion 7") {
  auto config = fano_plane();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto result =
        attack_until_identified(config, Protocol::Upir2, 0, 500, seed);
    CHECK(result.terminal.confusion_achieved == 7);
    CHECK(result.terminal.owner_in_candidates);
  }
}

TEST_CASE("live attack on the pentagon under upir2 breaks anonymity") {
  // unique closed neighborhoods (pentagonal, no opposite pairs)
  auto config = pentagon();
  auto result = attack_until_identified(config, Protocol::Upir2, 2, 500, 5);
  CHECK(result.terminal.confusion_achieved == 1);
  CHECK(result.terminal.candidate_set == std::vector<Point>{2});
}

TEST_CASE("patience default follows the cover-time heuristic") {
  // Fano: r(k-1)=6, 6*H6 = 14.7, ceil = 15, x10 = 150
  CHECK(default_patience(fano_plane()) == 150);
  // pentagon: r(k-1)=2, 2*1.5 = 3, x10 = 30
  CHECK(default_patience(pentagon()) == 30);
}

TEST_CASE("live attack without any forward reports full confusion") {
  // patience 0 stops the replay at step 0, before any observation
  LiveAttackOptions options;
  options.patience = 0;
  auto result = attack_until_identified(fano_plane(), Protocol::Upir1, 0, 10, 1,
                                        options);
  CHECK(result.trajectory.empty());
  CHECK(result.terminal.confusion_achieved == 7);
  CHECK(result.terminal.owner_in_candidates);
}

TEST_CASE("terminal candidates equal the structural set at full coverage") {
  struct Case {
    std::string name;
    Configuration config;
    Protocol protocol;
    Point owner;
  };
  std::vector<Case> cases;
  cases.push_back({"fano-upir1", fano_plane(), Protocol::Upir1, 3});
  cases.push_back({"fano-upir2", fano_plane(), Protocol::Upir2, 3});
  cases.push_back({"td33-upir1", transversal_design(3, 3).config(),
                   Protocol::Upir1, 4});
  cases.push_back({"pentagon-upir2", pentagon(), Protocol::Upir2, 1});
  cases.push_back({"cycle4-upir1", cycle(4), Protocol::Upir1, 2});
  cases.push_back({"ex36-upir1", example_36(), Protocol::Upir1, 7});

  for (const auto& c : cases) {
    INFO(c.name);
    const auto mode = c.protocol == Protocol::Upir1 ? NeighborhoodMode::Open
                                                    : NeighborhoodMode::Closed;
    auto trace = heavy_trace(c.config, c.protocol, c.owner, 4000, 99);
    auto report = intersection_attack(c.config, trace,
                                      QueryModel::rare_query_id(c.owner), mode);
    const auto full = mode == NeighborhoodMode::Open
                          ? c.config.neighborhood(c.owner)
                          : c.config.closed_neighborhood(c.owner);
    REQUIRE(report.observed_proxies == full);
    CHECK(report.candidate_set ==
          structural_anonymity_set(c.config, c.owner, mode));
  }
}
