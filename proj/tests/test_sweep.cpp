#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hetnet/sweep.hpp"

using namespace hetnet;

namespace {

json tiny_base_config() {
  return json{{"lambda_v", 0.5},
              {"lambda_d", 0.3},
              {"mu_v", 0.25},
              {"mu_d", 0.4},
              {"C", 3},
              {"R_LV_mbps", 0.02},
              {"R_LD_mbps", 5.0},
              {"W_mode", "fixed"},
              {"W", 2},
              {"wifi", json{{"model", "table"},
                            {"table", json::array({json::array({1, 20.0}),
                                                   json::array({2, 10.0})})}}}};
}

json tiny_spec() {
  // fixed B_max above the achievable floor at every grid point (forced data
  // overflow keeps the floor above the Erlang-B baseline here)
  return json{{"base", tiny_base_config()},
              {"sweep", json{{"variable", "lambda_v"}, {"grid", json::array({0.3, 0.5, 0.8})}}},
              {"B_max_mode", "fixed"},
              {"B_max", 0.45},
              {"mode", "exact"}};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("spec validation", "[sweep]") {
  json bad = tiny_spec();
  bad["sweep"]["grid"] = json::array();
  CHECK_THROWS(experiment_spec_from_json(bad));

  bad = tiny_spec();
  bad["sweep"]["grid"] = json::array({0.5, 0.3});
  CHECK_THROWS_AS(experiment_spec_from_json(bad), std::invalid_argument);

  bad = tiny_spec();
  bad["sweep"]["variable"] = "mu_v";
  CHECK_THROWS_AS(experiment_spec_from_json(bad), ConfigError);
}

TEST_CASE("exact sweep produces rows for every point and policy", "[sweep]") {
  const ExperimentSpec spec = experiment_spec_from_json(tiny_spec());
  const SweepResult result = run_sweep(spec);
  REQUIRE(result.rows.size() == 9);  // 3 points x 3 policies

  for (double x : {0.3, 0.5, 0.8}) {
    double ots = -1, alg1 = -1, alg2 = -1;
    for (const auto& r : result.rows) {
      if (r.x != x) continue;
      if (r.policy == "on_the_spot") ots = r.throughput;
      if (r.policy == "algorithm1") alg1 = r.throughput;
      if (r.policy == "algorithm2") {
        alg2 = r.throughput;
        CHECK_FALSE(r.cmdp_infeasible);
        CHECK(r.blocking <= r.b_max + 1e-3);  // constraint met (binding or slack)
      }
    }
    REQUIRE(ots >= 0);
    REQUIRE(alg1 >= 0);
    REQUIRE(alg2 >= 0);
    CHECK(alg1 >= ots - 1e-12);
    CHECK(alg2 <= alg1 + 1e-9);
  }
}

TEST_CASE("sweep outputs are byte-identical across runs", "[sweep]") {
  namespace fs = std::filesystem;
  const ExperimentSpec spec = experiment_spec_from_json(tiny_spec());
  const fs::path dir_a = fs::temp_directory_path() / "hetnet_sweep_a";
  const fs::path dir_b = fs::temp_directory_path() / "hetnet_sweep_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  emit_outputs(run_sweep(spec), dir_a.string());
  emit_outputs(run_sweep(spec), dir_b.string());
  for (const char* name : {"sweep.csv", "config_echo.json",
                           "plot_blocking_vs_lambda_v_exact.csv",
                           "plot_throughput_vs_lambda_v_exact.csv"}) {
    INFO(name);
    const std::string a = slurp((dir_a / name).string());
    REQUIRE_FALSE(a.empty());
    CHECK(a == slurp((dir_b / name).string()));
  }
  // every row carries the provenance hash
  std::istringstream csv(slurp((dir_a / "sweep.csv").string()));
  std::string line;
  std::getline(csv, line);  // header
  const SweepResult result = run_sweep(spec);
  while (std::getline(csv, line))
    if (!line.empty()) CHECK(line.find(result.config_hash) == 0);
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("infeasible constraint points are recorded and the sweep continues", "[sweep]") {
  json spec_json = tiny_spec();
  spec_json["B_max_mode"] = "fixed";
  spec_json["B_max"] = 1e-9;  // below any achievable blocking at these loads
  const ExperimentSpec spec = experiment_spec_from_json(spec_json);
  const SweepResult result = run_sweep(spec);
  int infeasible = 0;
  for (const auto& r : result.rows)
    if (r.policy == "algorithm2") {
      CHECK(r.cmdp_infeasible);
      CHECK(r.infeasible_bound > 0);
      ++infeasible;
    }
  CHECK(infeasible == 3);
  REQUIRE(result.rows.size() == 9);  // other policies unaffected
}

TEST_CASE("exact and simulated sweeps agree within the simulation errors", "[sweep]") {
  json spec_json = tiny_spec();
  spec_json["mode"] = "both";
  spec_json["sim"] = json{{"horizon_events", 60000},
                          {"warmup_events", 6000},
                          {"replications", 8},
                          {"base_seed", 21}};
  spec_json["sweep"]["grid"] = json::array({0.3, 0.5, 0.8});
  const ExperimentSpec spec = experiment_spec_from_json(spec_json);
  const SweepResult result = run_sweep(spec);
  int spot_checked = 0;
  for (const auto& sim_row : result.rows) {
    if (sim_row.eval != "sim" || sim_row.cmdp_infeasible) continue;
    for (const auto& exact_row : result.rows) {
      if (exact_row.eval != "exact" || exact_row.x != sim_row.x ||
          exact_row.policy != sim_row.policy || exact_row.cmdp_infeasible)
        continue;
      INFO(sim_row.policy << " at x=" << sim_row.x);
      // 3 stderr = 1.53 * the reported 95% interval
      CHECK(std::abs(sim_row.blocking - exact_row.blocking) <=
            3.0 / 1.96 * sim_row.blocking_ci + 1e-12);
      CHECK(std::abs(sim_row.throughput - exact_row.throughput) <=
            3.0 / 1.96 * sim_row.throughput_ci + 1e-12);
      ++spot_checked;
    }
  }
  CHECK(spot_checked >= 9);
}

TEST_CASE("simulation mode honors the seeded sim config", "[sweep]") {
  json spec_json = tiny_spec();
  spec_json["mode"] = "sim";
  spec_json["sim"] = json{{"horizon_events", 20000},
                          {"warmup_events", 2000},
                          {"replications", 4},
                          {"base_seed", 3}};
  spec_json["sweep"]["grid"] = json::array({0.5});
  spec_json["policies"] = json::array({"on_the_spot", "algorithm1"});
  const ExperimentSpec spec = experiment_spec_from_json(spec_json);
  const SweepResult result = run_sweep(spec);
  REQUIRE(result.rows.size() == 2);
  for (const auto& r : result.rows) {
    CHECK(r.eval == "sim");
    CHECK(r.blocking_ci > 0);
  }
}
