#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cis/cli.hpp"
#include "cis/csv.hpp"

namespace {

namespace fs = std::filesystem;

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"cis"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  return cis::cli::run((int)argv.size(), argv.data());
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("cis_cli_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("simulate writes a loadable standardized dataset with its truth") {
  const auto dir = fresh_dir("sim");
  REQUIRE(run_cli({"simulate", "--model", "B", "--n", "50", "--p", "200", "--m", "2", "--rho",
                   "0.5", "--seed", "7", "--out-dir", dir.string()}) == 0);
  for (const char* f : {"dataset.csv", "truth.csv", "manifest.json", "rerun.cfg"}) {
    CHECK(fs::exists(dir / f));
  }

  auto d = cis::load_csv((dir / "dataset.csv").string(), "y");
  CHECK(d.n == 50);
  CHECK(d.p == 200);
  for (int j = 0; j < d.p; ++j) {
    CHECK_THAT(d.X.col(j).squaredNorm(), Catch::Matchers::WithinAbs(50.0, 1e-6));
    CHECK_THAT(d.X.col(j).sum(), Catch::Matchers::WithinAbs(0.0, 1e-6));
  }

  auto truth = read_lines(dir / "truth.csv");
  REQUIRE(truth.size() == 11);
  CHECK(truth[0] == "variable_index_1based,name,beta");
  CHECK(truth[1].rfind("1,x1,1", 0) == 0);    // support head: index 0, sign +1
  CHECK(truth[2].rfind("3,x3,1", 0) == 0);    // second decile head at 0-based 2

  nlohmann::json manifest;
  std::ifstream(dir / "manifest.json") >> manifest;
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seed"] == 7);
  fs::remove_all(dir);
}

TEST_CASE("screen and icis run on a simulated dataset") {
  const auto dir = fresh_dir("pipe");
  REQUIRE(run_cli({"simulate", "--model", "C", "--n", "60", "--p", "30", "--rho", "0.4", "--seed",
                   "3", "--out-dir", dir.string()}) == 0);
  const std::string data = (dir / "dataset.csv").string();

  const auto screen_dir = fresh_dir("pipe_screen");
  REQUIRE(run_cli({"screen", "--input", data, "--method", "cis", "--top-k", "10", "--out-dir",
                   screen_dir.string()}) == 0);
  auto stats = read_lines(screen_dir / "stats.csv");
  REQUIRE(stats.size() == 31);
  CHECK(stats[0] == "variable_index_1based,name,method,statistic,rank,block_id");
  CHECK(read_lines(screen_dir / "selection.csv").size() == 11);
  CHECK(fs::exists(screen_dir / "partition.csv"));
  CHECK(fs::exists(screen_dir / "partition.json"));

  const auto icis_dir = fresh_dir("pipe_icis");
  REQUIRE(run_cli({"icis", "--input", data, "--B", "5", "--psi", "0.5", "--seed", "11",
                   "--out-dir", icis_dir.string()}) == 0);
  auto freq = read_lines(icis_dir / "frequencies.csv");
  REQUIRE(freq.size() == 31);
  CHECK(freq[0] == "variable_index_1based,name,psi_hat");
  CHECK(fs::exists(icis_dir / "selection.csv"));
  CHECK_FALSE(fs::exists(icis_dir / "fdr_curve.csv"));  // fixed psi skips calibration

  nlohmann::json manifest;
  std::ifstream(icis_dir / "manifest.json") >> manifest;
  CHECK(manifest["calibrated"] == false);
  CHECK(manifest["psi_used"] == 0.5);

  fs::remove_all(dir);
  fs::remove_all(screen_dir);
  fs::remove_all(icis_dir);
}

TEST_CASE("icis with psi zero calibrates and writes the fdr curve") {
  const auto dir = fresh_dir("cal");
  REQUIRE(run_cli({"simulate", "--model", "C", "--n", "50", "--p", "24", "--rho", "0.3", "--seed",
                   "5", "--out-dir", dir.string()}) == 0);
  const auto out = fresh_dir("cal_out");
  REQUIRE(run_cli({"icis", "--input", (dir / "dataset.csv").string(), "--B", "5", "--psi", "0",
                   "--q", "0.3", "--n-perm", "2", "--b-null", "5", "--seed", "13", "--out-dir",
                   out.string()}) == 0);
  auto curve = read_lines(out / "fdr_curve.csv");
  REQUIRE(curve.size() == 6);  // header plus one row per grid threshold
  CHECK(curve[0] == "psi,fdr_hat");

  nlohmann::json manifest;
  std::ifstream(out / "manifest.json") >> manifest;
  CHECK(manifest["calibrated"] == true);
  fs::remove_all(dir);
  fs::remove_all(out);
}

TEST_CASE("bench writes records and aggregates for a tiny run") {
  const auto dir = fresh_dir("bench");
  REQUIRE(run_cli({"bench", "--model", "C", "--n", "50", "--p", "24", "--rho", "0.3", "--methods",
                   "SIS", "--reps", "2", "--seed", "19", "--out-dir", dir.string()}) == 0);
  auto records = read_lines(dir / "records.csv");
  REQUIRE(records.size() == 3);
  CHECK(records[0] == "replicate,seed,model,method,min_model_size,fp,fn,wall_ms");
  auto aggs = read_lines(dir / "aggregates.csv");
  REQUIRE(aggs.size() == 2);
  CHECK(aggs[0] == "method,metric,mean,sd,n_reps");
  CHECK(fs::exists(dir / "rerun.cfg"));
  fs::remove_all(dir);
}

TEST_CASE("a rerun config reproduces the same records") {
  const auto dir = fresh_dir("rerun_a");
  REQUIRE(run_cli({"bench", "--model", "C", "--n", "50", "--p", "24", "--rho", "0.3", "--methods",
                   "SIS", "--reps", "2", "--seed", "19", "--out-dir", dir.string()}) == 0);
  const auto dir2 = fresh_dir("rerun_b");
  REQUIRE(run_cli({"--config", (dir / "rerun.cfg").string(), "--out-dir", dir2.string()}) == 0);
  const auto a = read_lines(dir / "records.csv");
  const auto b = read_lines(dir2 / "records.csv");
  CHECK(a == b);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("usage errors exit nonzero") {
  const auto dir = fresh_dir("usage");
  const std::string out = dir.string();
  // model A needs rho
  CHECK(run_cli({"simulate", "--model", "A", "--n", "50", "--p", "200", "--m", "2", "--out-dir",
                 out}) != 0);
  // model E derives n
  CHECK(run_cli({"simulate", "--model", "E", "--n", "50", "--p", "400", "--out-dir", out}) != 0);
  // missing required --p
  CHECK(run_cli({"simulate", "--model", "C", "--n", "50", "--out-dir", out}) != 0);
  CHECK(run_cli({"bench", "--preset", "table7-desk", "--out-dir", out}) != 0);
  CHECK(run_cli({"nonsense"}) != 0);
  fs::remove_all(dir);
}

TEST_CASE("screen selection rules are mutually exclusive and validated") {
  const auto dir = fresh_dir("rules");
  REQUIRE(run_cli({"simulate", "--model", "C", "--n", "40", "--p", "20", "--rho", "0.3", "--seed",
                   "23", "--out-dir", dir.string()}) == 0);
  const std::string data = (dir / "dataset.csv").string();
  const auto out = fresh_dir("rules_out");
  CHECK(run_cli({"screen", "--input", data, "--out-dir", out.string()}) != 0);
  CHECK(run_cli({"screen", "--input", data, "--top-k", "5", "--nu", "0.2", "--out-dir",
                 out.string()}) != 0);
  CHECK(run_cli({"screen", "--input", data, "--top-k", "0", "--out-dir", out.string()}) != 0);
  CHECK(run_cli({"icis", "--input", data, "--B", "3", "--psi", "0", "--q", "1.5", "--out-dir",
                 out.string()}) != 0);
  fs::remove_all(dir);
  fs::remove_all(out);
}
