// upir-lab: construct combinatorial configurations, analyze their
// neighborhood anonymity, simulate the P2P UPIR protocols on them, and run
// the curious-server intersection attacks against the traces.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "upir/upir.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::uint32_t max_points_cap() {
  const char* env = std::getenv("UPIR_LAB_MAX_POINTS");
  if (env == nullptr || *env == '\0') return upir::kDefaultMaxPoints;
  char* end = nullptr;
  unsigned long value = std::strtoul(env, &end, 10);
  if (end == nullptr || *end != '\0' || value == 0) {
    throw upir::ParameterError("UPIR_LAB_MAX_POINTS must be a positive integer");
  }
  return static_cast<std::uint32_t>(value);
}

void write_output(const std::optional<std::string>& path, const std::string& data) {
  if (!path) {
    std::cout << data;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + *path);
  out << data;
}

std::uint32_t parse_u32(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    unsigned long value = std::stoul(text, &pos, 10);
    if (pos != text.size() || value > 0xfffffffful) throw std::invalid_argument(text);
    return static_cast<std::uint32_t>(value);
  } catch (const std::exception&) {
    throw upir::ParameterError(what + " must be a nonnegative integer, got '" +
                               text + "'");
  }
}

struct ConstructResult {
  upir::IncidenceStructure structure;
  upir::Sidecar sidecar;
};

ConstructResult run_construct(const std::string& name,
                              const std::vector<std::string>& params) {
  const std::uint32_t cap = max_points_cap();
  auto need = [&](std::size_t n) {
    if (params.size() != n) {
      throw upir::ParameterError("construct " + name + " takes " +
                                 std::to_string(n) + " parameter(s), got " +
                                 std::to_string(params.size()));
    }
  };
  if (name == "affine") {
    need(1);
    auto plane = upir::affine_plane(parse_u32(params[0], "order"), cap);
    return {plane.config.structure(),
            upir::Sidecar{{}, plane.classes.classes()}};
  }
  if (name == "td" || name == "pappus") {
    std::uint32_t k = 3, n = 3;
    if (name == "td") {
      need(2);
      k = parse_u32(params[0], "k");
      n = parse_u32(params[1], "n");
    } else {
      need(0);
    }
    auto td = upir::transversal_design(k, n, cap);
    return {td.config().structure(), upir::Sidecar{td.groups(), {}}};
  }
  if (name == "fano") {
    need(0);
    return {upir::fano_plane().structure(), {}};
  }
  if (name == "example36") {
    need(0);
    return {upir::example_36().structure(), {}};
  }
  if (name == "cycle") {
    need(1);
    std::uint32_t v = parse_u32(params[0], "v");
    if (v > cap) {
      throw upir::ResourceLimitError("cycle(" + std::to_string(v) +
                                     ") exceeds the point cap of " +
                                     std::to_string(cap));
    }
    return {upir::cycle(v).structure(), {}};
  }
  if (name == "extend-closed") {
    need(1);
    upir::Configuration config{upir::read_cfg_file(params[0])};
    auto partition = upir::anonymity_partition(config, upir::NeighborhoodMode::Open);
    upir::GroupedConfiguration grouped(config, partition.parts);
    upir::Configuration extended = upir::extend_to_closed_anonymous(grouped);
    return {extended.structure(), upir::Sidecar{partition.parts, {}}};
  }
  throw upir::ParameterError(
      "unknown construction '" + name +
      "' (expected affine, td, fano, pappus, cycle, example36, extend-closed)");
}

nlohmann::json partition_json(const upir::AnonymityPartition& partition) {
  return {{"level", partition.level}, {"parts", partition.parts}};
}

std::string run_analyze(const std::string& cfg_path) {
  upir::Configuration config{upir::read_cfg_file(cfg_path)};
  nlohmann::json j;
  j["version"] = std::string(upir::kVersion);
  j["v"] = config.v();
  j["b"] = config.b();
  j["r"] = config.r();
  j["k"] = config.k();
  j["deficiency"] = config.deficiency();
  auto open = upir::anonymity_partition(config, upir::NeighborhoodMode::Open);
  auto closed = upir::anonymity_partition(config, upir::NeighborhoodMode::Closed);
  j["open"] = partition_json(open);
  j["closed"] = partition_json(closed);
  j["triangle_free"] = upir::is_triangle_free(config);

  auto pentagonal = upir::pentagonal_report(config);
  nlohmann::json pj;
  pj["is_pentagonal"] = pentagonal.is_pentagonal;
  nlohmann::json opposite = nlohmann::json::array();
  for (const auto& line : pentagonal.opposite_line) {
    if (line) {
      opposite.push_back(*line);
    } else {
      opposite.push_back(nullptr);
    }
  }
  pj["opposite_line"] = opposite;
  pj["opposite_line_pairs"] = pentagonal.opposite_line_pairs;
  j["pentagonal"] = pj;

  auto td = upir::is_transversal_design(config);
  nlohmann::json tj;
  tj["is_transversal_design"] = td.has_value();
  if (td) tj["groups"] = td->groups();
  j["transversal"] = tj;

  if (open.level >= 2) {
    auto ch = upir::check_characterization(config);
    j["characterization"] = {{"level", ch.level},
                             {"part_count", ch.part_count},
                             {"parts_noncollinear", ch.parts_noncollinear},
                             {"r_at_least_level", ch.r_at_least_level},
                             {"parts_at_least_k", ch.parts_at_least_k},
                             {"r_equals_level", ch.r_equals_level},
                             {"parts_equal_k", ch.parts_equal_k}};
  } else {
    j["characterization"] = nullptr;
  }
  return j.dump() + "\n";
}

upir::QueryModel model_from_json(const nlohmann::json& j) {
  upir::UserQuerySpec default_spec;
  std::map<upir::Point, upir::UserQuerySpec> overrides;
  if (j.contains("default")) {
    default_spec.rare = j.at("default").value("rare", 0.0);
    default_spec.background = j.at("default").value("background", 0.0);
  }
  if (j.contains("users")) {
    for (const auto& [key, spec] : j.at("users").items()) {
      upir::UserQuerySpec user_spec;
      user_spec.rare = spec.value("rare", 0.0);
      user_spec.background = spec.value("background", 0.0);
      overrides[parse_u32(key, "model user id")] = user_spec;
    }
  }
  return upir::QueryModel(default_spec, overrides);
}

upir::QueryModel load_model(const std::optional<std::string>& path) {
  if (!path) return upir::QueryModel::uniform_background(0.25);
  std::ifstream in(*path);
  if (!in) throw std::runtime_error("cannot open model file: " + *path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

std::optional<double> parse_self_submission(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t pos = 0;
    double value = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw upir::ParameterError("--self-submission expects 'auto' or a number");
  }
}

nlohmann::json attack_report_json(const upir::AttackReport& report) {
  return {{"version", std::string(upir::kVersion)},
          {"mode", upir::to_string(report.mode)},
          {"query", report.query_id},
          {"observed_proxies", report.observed_proxies},
          {"candidate_set", report.candidate_set},
          {"confusion_achieved", report.confusion_achieved},
          {"true_owner", report.true_owner},
          {"owner_in_candidates", report.owner_in_candidates},
          {"structural_bound", report.structural_bound}};
}

std::string trajectory_csv(const upir::AttackRun& run, std::uint64_t seed) {
  std::ostringstream out;
  out << "# upir-lab " << upir::kVersion << " seed=" << seed
      << " steps_used=" << run.steps_used << '\n';
  out << "observation_index,candidate_count\n";
  for (const auto& step : run.trajectory) {
    out << step.observation_index << ',' << step.report.confusion_achieved
        << '\n';
  }
  return out.str();
}

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

SeedRange parse_seed_range(const std::string& text) {
  auto sep = text.find("..");
  if (sep == std::string::npos) {
    throw upir::ParameterError("--seeds expects a range a..b");
  }
  SeedRange range;
  range.first = std::stoull(text.substr(0, sep));
  range.last = std::stoull(text.substr(sep + 2));
  if (range.last < range.first) {
    throw upir::ParameterError("--seeds range is empty");
  }
  return range;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"combinatorial configurations and P2P UPIR anonymity lab"};
  app.set_version_flag("--version", std::string(upir::kVersion));
  app.require_subcommand(1);

  // construct
  auto* construct = app.add_subcommand(
      "construct", "build a configuration and emit its cfg file");
  std::string construct_name;
  std::vector<std::string> construct_params;
  std::optional<std::string> construct_out;
  std::optional<std::string> construct_sidecar;
  construct->add_option("name", construct_name,
                        "affine | td | fano | pappus | cycle | example36 | "
                        "extend-closed")->required();
  construct->add_option("params", construct_params, "constructor parameters");
  construct->add_option("--out", construct_out, "output cfg path (default stdout)");
  construct->add_option("--sidecar", construct_sidecar,
                        "write groups/parallel-class annotations as JSON");

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "report parameters, anonymity partitions and predicates");
  std::string analyze_cfg;
  std::optional<std::string> analyze_out;
  analyze->add_option("cfg", analyze_cfg, "cfg file")->required();
  analyze->add_option("--out", analyze_out, "output path (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "run P2P UPIR on a configuration and emit the trace");
  std::string sim_cfg;
  std::string sim_protocol;
  std::string sim_self = "auto";
  std::uint32_t sim_steps = 0;
  std::uint64_t sim_seed = 0;
  std::optional<std::string> sim_model;
  std::optional<std::string> sim_out;
  bool sim_summary = false;
  simulate->add_option("--cfg", sim_cfg, "cfg file")->required();
  simulate->add_option("--protocol", sim_protocol, "upir1 | upir2")
      ->required()
      ->check(CLI::IsMember({"upir1", "upir2"}));
  simulate->add_option("--self-submission", sim_self,
                       "upir2 self-submission: auto or a probability");
  simulate->add_option("--steps", sim_steps, "global steps")->required();
  simulate->add_option("--seed", sim_seed, "rng seed")->required();
  simulate->add_option("--model", sim_model, "query model JSON file");
  simulate->add_flag("--summary", sim_summary,
                     "emit per-user proxy distributions as CSV instead of the trace");
  simulate->add_option("--out", sim_out, "output path (default stdout)");

  // attack
  auto* attack = app.add_subcommand(
      "attack", "intersection attack on a trace, or a live attack campaign");
  std::string atk_cfg;
  std::optional<std::string> atk_trace;
  std::optional<std::string> atk_query;
  std::string atk_mode = "open";
  std::vector<upir::Point> atk_proxies;
  bool atk_live = false;
  std::string atk_protocol = "upir1";
  std::uint32_t atk_owner = 0;
  std::uint32_t atk_max_steps = 500;
  std::uint64_t atk_seed = 0;
  std::optional<std::string> atk_seeds;
  std::optional<std::string> atk_outdir;
  std::optional<std::uint32_t> atk_patience;
  std::string atk_self = "auto";
  double atk_background = 0.0;
  std::optional<std::string> atk_out;
  attack->add_option("--cfg", atk_cfg, "cfg file")->required();
  attack->add_option("--trace", atk_trace, "trace JSONL file");
  attack->add_option("--query", atk_query, "query id to attack");
  attack->add_option("--mode", atk_mode, "open | closed")
      ->check(CLI::IsMember({"open", "closed"}));
  attack->add_option("--proxies", atk_proxies,
                     "restrict observations to these colluding proxies");
  attack->add_flag("--live", atk_live, "simulate and attack until identified");
  attack->add_option("--protocol", atk_protocol, "upir1 | upir2 (live)")
      ->check(CLI::IsMember({"upir1", "upir2"}));
  attack->add_option("--owner", atk_owner, "victim point (live)");
  attack->add_option("--max-steps", atk_max_steps, "step budget (live)");
  attack->add_option("--seed", atk_seed, "rng seed (live)");
  attack->add_option("--seeds", atk_seeds, "seed range a..b (live campaign)");
  attack->add_option("--outdir", atk_outdir, "per-seed output directory (live campaign)");
  attack->add_option("--patience", atk_patience,
                     "steps without shrink before stopping (live)");
  attack->add_option("--self-submission", atk_self,
                     "upir2 self-submission: auto or a probability (live)");
  attack->add_option("--background", atk_background,
                     "background query rate of the other users (live)");
  attack->add_option("--out", atk_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  if (construct->parsed()) {
    ConstructResult result = run_construct(construct_name, construct_params);
    write_output(construct_out, upir::emit_cfg(result.structure));
    if (construct_sidecar) {
      write_output(construct_sidecar, upir::emit_sidecar(result.sidecar));
    }
    return 0;
  }

  if (analyze->parsed()) {
    write_output(analyze_out, run_analyze(analyze_cfg));
    return 0;
  }

  if (simulate->parsed()) {
    upir::Configuration config{upir::read_cfg_file(sim_cfg)};
    upir::Community community(config, load_model(sim_model), sim_seed);
    const upir::Protocol protocol =
        sim_protocol == "upir2" ? upir::Protocol::Upir2 : upir::Protocol::Upir1;
    const auto& trace = upir::run(community, protocol, sim_steps,
                                  parse_self_submission(sim_self));
    write_output(sim_out, sim_summary ? upir::proxy_summary_csv(trace)
                                      : upir::trace_to_jsonl(trace));
    return 0;
  }

  // attack
  upir::Configuration config{upir::read_cfg_file(atk_cfg)};
  if (!atk_live) {
    if (!atk_trace || !atk_query) {
      std::cerr << "attack needs either --live or both --trace and --query\n";
      return kExitUsage;
    }
    std::ifstream in(*atk_trace);
    if (!in) throw std::runtime_error("cannot open trace file: " + *atk_trace);
    upir::SimulationTrace trace = upir::trace_from_jsonl(in);
    upir::AttackOptions options;
    if (!atk_proxies.empty()) options.observers = atk_proxies;
    const auto mode = atk_mode == "closed" ? upir::NeighborhoodMode::Closed
                                           : upir::NeighborhoodMode::Open;
    auto report = upir::intersection_attack(config, trace, *atk_query, mode, options);
    write_output(atk_out, attack_report_json(report).dump() + "\n");
    return 0;
  }

  const upir::Protocol protocol =
      atk_protocol == "upir2" ? upir::Protocol::Upir2 : upir::Protocol::Upir1;
  upir::LiveAttackOptions options;
  options.patience = atk_patience;
  options.self_submission = parse_self_submission(atk_self);
  options.background_for_others = atk_background;

  if (!atk_seeds) {
    auto result = upir::attack_until_identified(config, protocol, atk_owner,
                                                atk_max_steps, atk_seed, options);
    write_output(atk_out, trajectory_csv(result, atk_seed));
    return 0;
  }

  if (!atk_outdir) {
    std::cerr << "--seeds needs --outdir for the per-seed trajectories\n";
    return kExitUsage;
  }
  SeedRange range = parse_seed_range(*atk_seeds);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = range.first; s <= range.last; ++s) seeds.push_back(s);

  std::vector<upir::AttackRun> runs(seeds.size());
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(seeds.size(), std::thread::hardware_concurrency()));
  std::size_t next = 0;
  while (next < seeds.size()) {
    std::vector<std::future<void>> batch;
    for (std::size_t w = 0; w < workers && next < seeds.size(); ++w, ++next) {
      const std::size_t i = next;
      batch.push_back(std::async(std::launch::async, [&, i] {
        runs[i] = upir::attack_until_identified(config, protocol, atk_owner,
                                                atk_max_steps, seeds[i], options);
      }));
    }
    for (auto& f : batch) f.get();
  }

  std::ostringstream summary;
  summary << "# upir-lab " << upir::kVersion << " seeds=" << range.first << ".."
          << range.last << '\n';
  summary << "seed,steps_used,terminal_confusion,owner_in_candidates\n";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    std::ofstream out(*atk_outdir + "/trajectory-" + std::to_string(seeds[i]) +
                          ".csv",
                      std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot write trajectory file in " + *atk_outdir);
    }
    out << trajectory_csv(runs[i], seeds[i]);
    summary << seeds[i] << ',' << runs[i].steps_used << ','
            << runs[i].terminal.confusion_achieved << ','
            << (runs[i].terminal.owner_in_candidates ? 1 : 0) << '\n';
  }
  write_output(atk_out, summary.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const upir::ResourceLimitError& e) {
    std::cerr << e.what() << '\n';
    return kExitRuntime;
  } catch (const upir::ConfigurationError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const upir::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const std::logic_error& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitRuntime;
  }
}
