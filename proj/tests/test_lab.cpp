#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seqpred/experiments.hpp"
#include "seqpred/report.hpp"

using namespace seqpred;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentResult tiny_result() {
  ExperimentResult r;
  r.name = "demo";
  r.spec_echo = {{"seed", 9}};
  DivergenceSeries s;
  s.points.push_back(DivergenceSeries::exact_point(2, 0.5));
  r.series.push_back({"main", s});
  r.add_verdict("holds", true, "0.5 <= 1");
  r.extra = {{"note", "synthetic"}};
  return r;
}

}  // namespace

TEST_CASE("atomic file writes land complete and leave no temp files") {
  auto dir = fresh_dir("seqpred_atomic_test");
  auto p = dir / "out.txt";
  atomic_write_file(p, "first\n");
  REQUIRE(slurp(p) == "first\n");
  atomic_write_file(p, "second\n");
  REQUIRE(slurp(p) == "second\n");
  for (const auto& e : std::filesystem::directory_iterator(dir))
    REQUIRE(e.path().extension() != ".tmp");
}

TEST_CASE("experiment files: series payloads plus a manifest") {
  auto r = tiny_result();

  RunConfig cfg;
  cfg.seed = 9;
  cfg.out_dir = fresh_dir("seqpred_report_test").string();
  auto written = write_experiment_files(r, cfg, 12.5);
  REQUIRE(written.size() == 2);

  auto csv_path = std::filesystem::path(cfg.out_dir) / "demo_main.csv";
  REQUIRE(std::filesystem::exists(csv_path));
  REQUIRE(slurp(csv_path) == "n,value,value_over_n,stderr,mode,seed\n2,0.5,0.25,,exact,\n");

  auto manifest = nlohmann::json::parse(slurp(std::filesystem::path(cfg.out_dir) / "demo_manifest.json"));
  REQUIRE(manifest["experiment"] == "demo");
  REQUIRE(manifest["all_pass"] == true);
  REQUIRE(manifest["config"]["seed"] == 9);
  REQUIRE(manifest["verdicts"].size() == 1);
  REQUIRE(manifest["verdicts"][0]["name"] == "holds");
  REQUIRE(manifest["series_files"] == nlohmann::json::array({"demo_main.csv"}));
  REQUIRE(manifest.contains("wall_clock_ms"));

  // json format switches the series payload, manifest stays json
  cfg.format = "json";
  cfg.out_dir = fresh_dir("seqpred_report_test_json").string();
  write_experiment_files(r, cfg, 1.0);
  auto rows = nlohmann::json::parse(slurp(std::filesystem::path(cfg.out_dir) / "demo_main.json"));
  REQUIRE(rows.is_array());
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0]["n"] == 2);

  // empty out_dir: dry run
  RunConfig dry;
  REQUIRE(write_experiment_files(r, dry, 0.0).empty());
}

TEST_CASE("failed verdicts flip all_pass") {
  auto r = tiny_result();
  REQUIRE(r.all_pass());
  r.add_verdict("broken", false, "1 > 0 expected");
  REQUIRE(!r.all_pass());
}

TEST_CASE("experiment registry is pinned") {
  REQUIRE(experiment_names() ==
          std::vector<std::string>{"theorem3_c1", "theorem3_c2", "finite_memory", "stationary_impossibility",
                                   "sqrt_zeros", "cover_construction"});
  RunConfig cfg;
  REQUIRE_THROWS_AS(run_experiment("no_such_thing", cfg), std::invalid_argument);
}

TEST_CASE("enumeration affordability and the horizon ladder") {
  REQUIRE(exact_affordable(2, 24));
  REQUIRE(!exact_affordable(2, 25));
  REQUIRE(exact_affordable(3, 15));
  REQUIRE(!exact_affordable(3, 16));
  REQUIRE(experiment_horizons() == std::vector<int>{16, 32, 64, 128, 256, 512, 1024, 2048, 4096});
}

TEST_CASE("sparse-zeros experiment verifies its own claims") {
  RunConfig cfg;  // no out_dir: nothing written
  auto r = run_experiment("sqrt_zeros", cfg);
  REQUIRE(r.name == "sqrt_zeros");
  REQUIRE(r.all_pass());
  std::set<std::string> names;
  for (const auto& s : r.series) names.insert(s.name);
  REQUIRE(names == std::set<std::string>{"dn_mu_vs_nu", "dinf_members"});
  REQUIRE(r.verdicts.size() == 3);
}
