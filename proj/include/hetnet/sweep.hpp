#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/cmdp.hpp"
#include "hetnet/config.hpp"
#include "hetnet/evaluate.hpp"
#include "hetnet/io.hpp"
#include "hetnet/model.hpp"
#include "hetnet/simulate.hpp"
#include "hetnet/solver.hpp"
#include "hetnet/structure.hpp"

namespace hetnet {

enum class SweepVariable { LambdaV, LambdaD };
enum class EvalMode { Exact, Sim, Both };

/**
 * A batch experiment: sweep one arrival rate over a grid and compare the
 * unconstrained threshold policy, the constrained policy, and the on-the-spot
 * baseline. B_max for the constrained solve defaults to the Erlang-B blocking
 * of the baseline at each grid point (mode "erlang_b"); a fixed value can be
 * given instead.
 */
struct ExperimentSpec {
  ResolvedModel base;
  SweepVariable variable = SweepVariable::LambdaV;
  std::vector<double> grid;
  bool b_max_from_erlang = true;
  double b_max_fixed = 0.02;
  bool run_algorithm1 = true;
  bool run_algorithm2 = true;
  bool run_on_the_spot = true;
  EvalMode mode = EvalMode::Exact;
  SimConfig sim;
  SolverConfig solver;

  void validate() const {
    if (grid.empty()) throw std::invalid_argument("ExperimentSpec: empty sweep grid");
    for (size_t n = 1; n < grid.size(); ++n)
      if (!(grid[n] > grid[n - 1]))
        throw std::invalid_argument("ExperimentSpec: grid must be strictly increasing");
    if (!b_max_from_erlang && !(b_max_fixed > 0 && b_max_fixed < 1))
      throw std::invalid_argument("ExperimentSpec: fixed B_max must be inside (0,1)");
  }
};

inline ExperimentSpec experiment_spec_from_json(const json& j) {
  ExperimentSpec spec;
  spec.base = resolve_model_config(detail::require<json>(j, "base"));
  const json& sweep = detail::require<json>(j, "sweep");
  const std::string var = detail::require<std::string>(sweep, "variable");
  if (var == "lambda_v")
    spec.variable = SweepVariable::LambdaV;
  else if (var == "lambda_d")
    spec.variable = SweepVariable::LambdaD;
  else
    throw ConfigError("spec: sweep.variable must be lambda_v or lambda_d");
  spec.grid = detail::require<std::vector<double>>(sweep, "grid");
  const std::string bmode = detail::get_or<std::string>(j, "B_max_mode", "erlang_b");
  if (bmode == "erlang_b")
    spec.b_max_from_erlang = true;
  else if (bmode == "fixed") {
    spec.b_max_from_erlang = false;
    spec.b_max_fixed = detail::require<double>(j, "B_max");
  } else
    throw ConfigError("spec: B_max_mode must be erlang_b or fixed");
  if (j.contains("policies")) {
    spec.run_algorithm1 = spec.run_algorithm2 = spec.run_on_the_spot = false;
    for (const auto& p : j.at("policies")) {
      const std::string name = p.get<std::string>();
      if (name == "algorithm1")
        spec.run_algorithm1 = true;
      else if (name == "algorithm2")
        spec.run_algorithm2 = true;
      else if (name == "on_the_spot")
        spec.run_on_the_spot = true;
      else
        throw ConfigError("spec: unknown policy '" + name + "'");
    }
  }
  const std::string mode = detail::get_or<std::string>(j, "mode", "exact");
  if (mode == "exact")
    spec.mode = EvalMode::Exact;
  else if (mode == "sim")
    spec.mode = EvalMode::Sim;
  else if (mode == "both")
    spec.mode = EvalMode::Both;
  else
    throw ConfigError("spec: mode must be exact, sim or both");
  if (j.contains("sim")) spec.sim = sim_config_from_json(j.at("sim"));
  if (j.contains("solver")) spec.solver = solver_config_from_json(j.at("solver"));
  spec.validate();
  return spec;
}

struct SweepRow {
  double x = 0;             // grid value
  std::string policy;       // algorithm1 | algorithm2 | on_the_spot
  std::string eval;         // exact | sim
  double blocking = 0;
  double blocking_ci = 0;   // 0 in exact mode
  double throughput = 0;
  double throughput_ci = 0;
  double g = 0;             // solver gain where applicable
  double beta_star = 0;
  double mix_p = 1;
  double b_max = 0;
  bool cmdp_infeasible = false;
  double infeasible_bound = 0;
};

struct SweepResult {
  json spec_echo;
  std::string config_hash;
  std::vector<SweepRow> rows;
};

/**
 * Runs the sweep: per grid point re-solve the unconstrained problem, rebuild
 * the Algorithm-1 threshold policy, solve the constrained problem at that
 * point's B_max, and evaluate every requested policy exactly and/or by
 * simulation. Deterministic for a fixed spec and seed. A CMDP infeasibility
 * records the achievable bound for the point and the sweep continues.
 */
inline SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  SweepResult result;

  result.spec_echo = json{
      {"base", spec.base.echo},
      {"sweep",
       json{{"variable", spec.variable == SweepVariable::LambdaV ? "lambda_v" : "lambda_d"},
            {"grid", spec.grid}}},
      {"B_max_mode", spec.b_max_from_erlang ? "erlang_b" : "fixed"},
      {"mode", spec.mode == EvalMode::Exact   ? "exact"
               : spec.mode == EvalMode::Sim   ? "sim"
                                              : "both"},
      {"sim", json{{"horizon_events", spec.sim.horizon_events},
                   {"warmup_events", spec.sim.warmup_events},
                   {"replications", spec.sim.replications},
                   {"base_seed", spec.sim.base_seed}}},
      {"solver", json{{"via_tolerance", spec.solver.via_tolerance},
                      {"beta_tolerance", spec.solver.beta_tolerance}}}};
  if (!spec.b_max_from_erlang) result.spec_echo["B_max"] = spec.b_max_fixed;
  result.config_hash = fnv1a_hex(result.spec_echo.dump());

  const bool exact = spec.mode != EvalMode::Sim;
  const bool sim = spec.mode != EvalMode::Exact;

  for (double x : spec.grid) {
    ModelParams params = spec.base.params;
    (spec.variable == SweepVariable::LambdaV ? params.lambda_v : params.lambda_d) = x;
    params.validate();
    const StateSpace space(params);
    const KthResult kth = compute_k_th(params.wifi_curve, params.r_ld_mbps);
    const double b_max = spec.b_max_from_erlang
                             ? erlang_b(params.C, params.lambda_v / params.mu_v)
                             : spec.b_max_fixed;

    auto push_exact = [&](const std::string& name, const PolicyEvaluation& ev, double g,
                          double beta_star, double p) {
      SweepRow row;
      row.x = x;
      row.policy = name;
      row.eval = "exact";
      row.blocking = ev.blocking;
      row.throughput = ev.throughput_mbps;
      row.g = g;
      row.beta_star = beta_star;
      row.mix_p = p;
      row.b_max = b_max;
      result.rows.push_back(row);
    };
    auto push_sim = [&](const std::string& name, const SimMetrics& m, double beta_star, double p) {
      SweepRow row;
      row.x = x;
      row.policy = name;
      row.eval = "sim";
      row.blocking = m.blocking_mean;
      row.blocking_ci = m.blocking_ci95;
      row.throughput = m.throughput_mean;
      row.throughput_ci = m.throughput_ci95;
      row.beta_star = beta_star;
      row.mix_p = p;
      row.b_max = b_max;
      result.rows.push_back(row);
    };

    if (spec.run_on_the_spot) {
      const Policy ots = policy_on_the_spot(space, params);
      if (exact) push_exact("on_the_spot", evaluate_policy_exact(ots, params, space), 0, 0, 1);
      if (sim) push_sim("on_the_spot", simulate(make_decision_fn(ots, space), params, spec.sim),
                        0, 1);
    }

    std::optional<SolveResult> unconstrained;
    if (spec.run_algorithm1 || spec.run_algorithm2)
      unconstrained = value_iteration(uniformize(params), 0.0, spec.solver);

    if (spec.run_algorithm1) {
      // the deployed form of the policy is the threshold replay; the
      // extraction proves it equals the solved policy
      const ThresholdTables tables =
          extract_thresholds(unconstrained->policy, kth.k_th, space, params);
      const Policy alg1 = policy_from_thresholds(tables, space, params);
      if (exact)
        push_exact("algorithm1", evaluate_policy_exact(alg1, params, space), unconstrained->g, 0,
                   1);
      if (sim)
        push_sim("algorithm1", simulate(make_decision_fn(alg1, space), params, spec.sim), 0, 1);
    }

    if (spec.run_algorithm2) {
      try {
        const CmdpResult cmdp = solve_cmdp(params, b_max, spec.solver);
        if (exact)
          push_exact("algorithm2", evaluate_randomized_exact(cmdp.policy, params, space),
                     cmdp.low_solve.g, cmdp.policy.beta_star, cmdp.policy.p);
        if (sim)
          push_sim("algorithm2",
                   simulate(make_randomized_decision_fn(cmdp.policy, space), params, spec.sim),
                   cmdp.policy.beta_star, cmdp.policy.p);
      } catch (const InfeasibleConstraintError& err) {
        SweepRow row;
        row.x = x;
        row.policy = "algorithm2";
        row.eval = exact ? "exact" : "sim";
        row.b_max = b_max;
        row.cmdp_infeasible = true;
        row.infeasible_bound = err.min_achievable;
        result.rows.push_back(row);
      }
    }
  }
  return result;
}

/**
 * Writes sweep.csv (one row per point x policy x evaluation mode), the full
 * config echo, and one plot-ready file per figure analogue: blocking and
 * throughput against the sweep variable, one series column per policy.
 */
inline void emit_outputs(const SweepResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string var =
      result.spec_echo.at("sweep").at("variable").get<std::string>();

  {
    auto out = open_output(out_dir + "/sweep.csv");
    out << "config_hash," << var
        << ",policy,eval,blocking,blocking_ci95,throughput_mbps,throughput_ci95,g_mbps,beta_star,"
           "mix_p,b_max,cmdp_infeasible,infeasible_bound\n";
    for (const auto& r : result.rows) {
      out << result.config_hash << ',' << format_double(r.x) << ',' << r.policy << ',' << r.eval
          << ',' << format_double(r.blocking) << ',' << format_double(r.blocking_ci) << ','
          << format_double(r.throughput) << ',' << format_double(r.throughput_ci) << ','
          << format_double(r.g) << ',' << format_double(r.beta_star) << ','
          << format_double(r.mix_p) << ',' << format_double(r.b_max) << ','
          << (r.cmdp_infeasible ? 1 : 0) << ',' << format_double(r.infeasible_bound) << '\n';
    }
  }
  {
    auto out = open_output(out_dir + "/config_echo.json");
    json echo = result.spec_echo;
    echo["config_hash"] = result.config_hash;
    out << echo.dump(2) << '\n';
  }

  const std::vector<std::string> policies = {"on_the_spot", "algorithm1", "algorithm2"};
  auto series_value = [&](double x, const std::string& policy, const std::string& eval,
                          bool blocking) -> std::optional<double> {
    for (const auto& r : result.rows)
      if (r.x == x && r.policy == policy && r.eval == eval && !r.cmdp_infeasible)
        return blocking ? r.blocking : r.throughput;
    return std::nullopt;
  };
  std::vector<double> xs;
  for (const auto& r : result.rows)
    if (xs.empty() || xs.back() != r.x) xs.push_back(r.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  for (const std::string eval : {"exact", "sim"}) {
    bool any = false;
    for (const auto& r : result.rows) any = any || r.eval == eval;
    if (!any) continue;
    for (const bool blocking : {true, false}) {
      auto out = open_output(out_dir + "/plot_" + (blocking ? "blocking" : "throughput") + "_vs_" +
                             var + "_" + eval + ".csv");
      out << var;
      for (const auto& p : policies) out << ',' << p;
      out << '\n';
      for (double x : xs) {
        out << format_double(x);
        for (const auto& p : policies) {
          out << ',';
          if (const auto v = series_value(x, p, eval, blocking)) out << format_double(*v);
        }
        out << '\n';
      }
    }
  }
}

}  // namespace hetnet
