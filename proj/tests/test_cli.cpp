#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "upir/cfg_format.hpp"
#include "upir/constructions.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
  std::string err;
};

const fs::path& tmp_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("upir-cli-test-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const fs::path out_path = tmp_dir() / "stdout.txt";
  const fs::path err_path = tmp_dir() / "stderr.txt";
  std::string cmd = env + (env.empty() ? "" : " ") + UPIR_LAB_BIN + " " + args +
                    " > " + out_path.string() + " 2> " + err_path.string();
  int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

}  // namespace

TEST_CASE("construct writes a canonical cfg file with empty stderr") {
  const fs::path cfg = tmp_dir() / "td33.cfg";
  auto result = run_cli("construct td 3 3 --out " + cfg.string());
  CHECK(result.exit_code == 0);
  CHECK(result.err.empty());
  CHECK(result.out.empty());

  auto parsed = upir::parse_cfg(slurp(cfg));
  upir::Configuration config{parsed};
  CHECK(config.v() == 9);
  CHECK(config.b() == 9);
  CHECK(config.r() == 3);
  CHECK(config.k() == 3);

  // round trip: parse + canonical re-emit reproduces the file bytes
  CHECK(upir::emit_cfg(parsed) == slurp(cfg));
}

TEST_CASE("pappus is td 3 3") {
  auto td = run_cli("construct td 3 3");
  auto pappus = run_cli("construct pappus");
  CHECK(td.exit_code == 0);
  CHECK(pappus.exit_code == 0);
  CHECK(td.out == pappus.out);
}

TEST_CASE("construct rejects a non-prime order with exit 2") {
  auto result = run_cli("construct affine 4");
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("prime") != std::string::npos);
  CHECK(result.out.empty());
}

TEST_CASE("construct example36 reproduces the golden file") {
  auto result = run_cli("construct example36");
  CHECK(result.exit_code == 0);
  CHECK(result.out == slurp(fs::path(UPIR_TEST_DATA_DIR) / "example36.cfg"));
}

TEST_CASE("construct emits sidecar annotations") {
  const fs::path cfg = tmp_dir() / "affine3.cfg";
  const fs::path sidecar = tmp_dir() / "affine3.json";
  auto result = run_cli("construct affine 3 --out " + cfg.string() +
                        " --sidecar " + sidecar.string());
  REQUIRE(result.exit_code == 0);
  auto parsed = upir::parse_sidecar(slurp(sidecar));
  CHECK(parsed.parallel_classes.size() == 4);
  CHECK(parsed.groups.empty());

  const fs::path td_sidecar = tmp_dir() / "td25.json";
  REQUIRE(run_cli("construct td 2 5 --out " + (tmp_dir() / "td25.cfg").string() +
                  " --sidecar " + td_sidecar.string())
              .exit_code == 0);
  CHECK(upir::parse_sidecar(slurp(td_sidecar)).groups.size() == 2);
}

TEST_CASE("construct extend-closed turns td33 into the affine plane") {
  const fs::path td_cfg = tmp_dir() / "td33x.cfg";
  REQUIRE(run_cli("construct td 3 3 --out " + td_cfg.string()).exit_code == 0);
  auto extended = run_cli("construct extend-closed " + td_cfg.string());
  REQUIRE(extended.exit_code == 0);
  auto affine = run_cli("construct affine 3");
  CHECK(extended.out == affine.out);
}

TEST_CASE("analyze reports the anonymity structure as JSON") {
  const fs::path cfg = tmp_dir() / "fano.cfg";
  REQUIRE(run_cli("construct fano --out " + cfg.string()).exit_code == 0);
  auto result = run_cli("analyze " + cfg.string());
  REQUIRE(result.exit_code == 0);
  auto j = nlohmann::json::parse(result.out);
  CHECK(j.at("v") == 7);
  CHECK(j.at("b") == 7);
  CHECK(j.at("r") == 3);
  CHECK(j.at("k") == 3);
  CHECK(j.at("deficiency") == 0);
  CHECK(j.at("open").at("level") == 1);
  CHECK(j.at("closed").at("level") == 7);
  CHECK(j.at("triangle_free") == false);
  CHECK(j.at("pentagonal").at("is_pentagonal") == false);
  CHECK(j.at("transversal").at("is_transversal_design") == false);
  CHECK(j.at("characterization").is_null());
  CHECK(j.at("version") == "0.1.0");
}

TEST_CASE("analyze reports the transversal grouping") {
  const fs::path cfg = tmp_dir() / "td33a.cfg";
  REQUIRE(run_cli("construct td 3 3 --out " + cfg.string()).exit_code == 0);
  auto result = run_cli("analyze " + cfg.string());
  REQUIRE(result.exit_code == 0);
  auto j = nlohmann::json::parse(result.out);
  CHECK(j.at("open").at("level") == 3);
  CHECK(j.at("transversal").at("is_transversal_design") == true);
  CHECK(j.at("transversal").at("groups").size() == 3);
  CHECK(j.at("characterization").at("r_equals_level") == true);
}

TEST_CASE("simulate is deterministic and supports summaries") {
  const fs::path cfg = tmp_dir() / "fano-sim.cfg";
  REQUIRE(run_cli("construct fano --out " + cfg.string()).exit_code == 0);
  const std::string base = "simulate --cfg " + cfg.string() +
                           " --protocol upir2 --steps 200 --seed 1";
  auto first = run_cli(base);
  auto second = run_cli(base);
  REQUIRE(first.exit_code == 0);
  CHECK(first.out == second.out);
  CHECK(first.out.find("\"type\":\"params\"") != std::string::npos);

  auto summary = run_cli(base + " --summary");
  REQUIRE(summary.exit_code == 0);
  CHECK(summary.out.find("owner,proxy,count\n") != std::string::npos);
}

TEST_CASE("attack replays a stored trace") {
  const fs::path cfg = tmp_dir() / "fano-atk.cfg";
  const fs::path trace = tmp_dir() / "fano-atk.jsonl";
  const fs::path model = tmp_dir() / "model.json";
  REQUIRE(run_cli("construct fano --out " + cfg.string()).exit_code == 0);
  {
    std::ofstream out(model);
    out << R"({"default":{"background":0.0},"users":{"0":{"rare":1.0}}})";
  }
  REQUIRE(run_cli("simulate --cfg " + cfg.string() +
                  " --protocol upir1 --steps 2000 --seed 7 --model " +
                  model.string() + " --out " + trace.string())
              .exit_code == 0);
  auto result = run_cli("attack --cfg " + cfg.string() + " --trace " +
                        trace.string() + " --query u0-rare --mode open");
  REQUIRE(result.exit_code == 0);
  auto j = nlohmann::json::parse(result.out);
  CHECK(j.at("true_owner") == 0);
  CHECK(j.at("owner_in_candidates") == true);
  CHECK(j.at("confusion_achieved") == 1);

  auto missing = run_cli("attack --cfg " + cfg.string() + " --trace " +
                         trace.string() + " --query nope --mode open");
  CHECK(missing.exit_code == 3);
}

TEST_CASE("live attack emits the shrink trajectory") {
  const fs::path cfg = tmp_dir() / "td33-live.cfg";
  REQUIRE(run_cli("construct td 3 3 --out " + cfg.string()).exit_code == 0);
  auto result = run_cli("attack --live --cfg " + cfg.string() +
                        " --protocol upir1 --owner 0 --max-steps 500 --seed 3");
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.find("observation_index,candidate_count\n") != std::string::npos);
  // terminal candidate count is the group size
  auto last_comma = result.out.find_last_of(',');
  CHECK(result.out.substr(last_comma) == ",3\n");
}

TEST_CASE("live attack campaigns fan out per seed") {
  const fs::path cfg = tmp_dir() / "td33-camp.cfg";
  const fs::path outdir = tmp_dir() / "campaign";
  fs::create_directories(outdir);
  REQUIRE(run_cli("construct td 3 3 --out " + cfg.string()).exit_code == 0);
  auto result = run_cli("attack --live --cfg " + cfg.string() +
                        " --protocol upir1 --owner 0 --max-steps 500" +
                        " --seeds 1..5 --outdir " + outdir.string());
  REQUIRE(result.exit_code == 0);
  std::istringstream lines(result.out);
  std::string line;
  std::getline(lines, line);  // comment
  std::getline(lines, line);
  CHECK(line == "seed,steps_used,terminal_confusion,owner_in_candidates");
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.find(",3,1") != std::string::npos);
  }
  CHECK(rows == 5);
  for (int seed = 1; seed <= 5; ++seed) {
    CHECK(fs::exists(outdir / ("trajectory-" + std::to_string(seed) + ".csv")));
  }
}

TEST_CASE("usage and validation errors use stable exit codes") {
  CHECK(run_cli("bogus").exit_code == 1);
  CHECK(run_cli("simulate --cfg x.cfg --protocol nope --steps 1 --seed 1")
            .exit_code == 1);
  CHECK(run_cli("attack --cfg missing.cfg --trace t --query q") .exit_code == 3);
  CHECK(run_cli("construct cycle 2").exit_code == 2);
  CHECK(run_cli("construct td 9 7").exit_code == 2);
  CHECK(run_cli("analyze /nonexistent.cfg").exit_code == 3);

  const fs::path bad = tmp_dir() / "bad.cfg";
  {
    std::ofstream out(bad, std::ios::binary);
    out << "cfg 3 1\n0 1\n1 2\n";
  }
  CHECK(run_cli("analyze " + bad.string()).exit_code == 2);

  const fs::path disconnected = tmp_dir() / "disc.cfg";
  {
    std::ofstream out(disconnected, std::ios::binary);
    out << "cfg 6 6\n0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n";
  }
  CHECK(run_cli("analyze " + disconnected.string()).exit_code == 2);
}

TEST_CASE("the point cap honors UPIR_LAB_MAX_POINTS") {
  auto capped = run_cli("construct affine 11", "UPIR_LAB_MAX_POINTS=100");
  CHECK(capped.exit_code == 3);
  auto fits = run_cli("construct affine 11", "UPIR_LAB_MAX_POINTS=121");
  CHECK(fits.exit_code == 0);
  auto bad_env = run_cli("construct fano", "UPIR_LAB_MAX_POINTS=abc");
  CHECK(bad_env.exit_code == 2);
}
