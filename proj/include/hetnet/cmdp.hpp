#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/evaluate.hpp"
#include "hetnet/model.hpp"
#include "hetnet/policy.hpp"
#include "hetnet/solver.hpp"
#include "hetnet/wifi.hpp"

namespace hetnet {

/** The blocking constraint cannot be met by any feasible policy. */
struct InfeasibleConstraintError : std::runtime_error {
  InfeasibleConstraintError(double bound, double requested)
      : std::runtime_error("constraint infeasible: minimum achievable blocking " +
                           std::to_string(bound) + " exceeds B_max " + std::to_string(requested)),
        min_achievable(bound),
        b_max(requested) {}
  double min_achievable;
  double b_max;
};

struct CmdpDiagnostics {
  std::vector<double> beta_trace;
  std::vector<double> blocking_trace;
  bool binding = false;
  double b_unconstrained = 0;    // blocking of the beta = 0 policy
  double b_min_achievable = 0;   // blocking of the maximal-acceptance policy
  double b_low = 0, b_high = 0;  // pure-policy blocking at beta* -/+ epsilon
  double b_mixed = 0;            // exact blocking of the returned mixture
  double throughput_mixed = 0;
  double linear_mix_residual = 0;  // |p b_low + (1-p) b_high - B_max|
  long beta_iterations = 0;
};

struct CmdpResult {
  RandomizedPolicy policy;
  SolveResult low_solve;
  SolveResult high_solve;
  CmdpDiagnostics diag;
};

/**
 * Most permissive admission policy: accept whenever any accept action is
 * feasible (voice via offload when k < k_th, data into WiFi below k_th),
 * rebalance after departures by the k_th rule. Its blocking is the reported
 * feasibility bound for the constraint.
 */
inline Policy maximal_acceptance_policy(const StateSpace& space, const ModelParams& params,
                                        int k_th) {
  Policy policy(space.size());
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s = space.state(idx);
    for (EventKind e : kAllEvents) {
      if (!decision_pair(s, e, params)) continue;
      const ActionSet set = feasible_actions(s, e, params);
      ActionKind pick = ActionKind::Block;
      switch (e) {
        case EventKind::VoiceArrival:
          if (s.k < k_th && set.contains(ActionKind::AcceptVoiceOffload))
            pick = ActionKind::AcceptVoiceOffload;
          else if (set.contains(ActionKind::AcceptLte))
            pick = ActionKind::AcceptLte;
          else if (set.contains(ActionKind::AcceptVoiceOffload))
            pick = ActionKind::AcceptVoiceOffload;
          break;
        case EventKind::DataArrival:
          if (s.k < k_th && set.contains(ActionKind::AcceptWifi))
            pick = ActionKind::AcceptWifi;
          else if (set.contains(ActionKind::AcceptLte))
            pick = ActionKind::AcceptLte;
          else if (set.contains(ActionKind::AcceptWifi))
            pick = ActionKind::AcceptWifi;
          break;
        case EventKind::VoiceDepartureLte:
        case EventKind::DataDepartureLte:
          pick = (s.k > k_th && set.contains(ActionKind::MoveData)) ? ActionKind::MoveData
                                                                    : ActionKind::Block;
          break;
        case EventKind::DataDepartureWifi:
          pick = (s.k <= k_th && set.contains(ActionKind::MoveData)) ? ActionKind::MoveData
                                                                     : ActionKind::Block;
          break;
      }
      policy.set(idx, e, pick);
    }
  }
  return policy;
}

/**
 * Constrained solve: maximize throughput subject to voice blocking <= B_max.
 *
 * The multiplier loop evaluates B at each beta exactly and updates beta by
 * the (1/k)(B - B_max) ascent; because B(beta) is a step function the raw
 * 1/k step cannot travel far, so the ascent gain doubles while the iterates
 * stay on one side of B_max, and once beta* is bracketed the loop bisects
 * the bracket (update signs alternate with shrinking steps) until it
 * collapses or |B - B_max| <= beta_tolerance. The two pure policies at
 * beta* -/+ epsilon straddle the constraint; the mixing probability p is
 * seeded from the linear mixing equation and refined so the exact blocking of
 * the per-decision mixture equals B_max.
 */
inline CmdpResult solve_cmdp(const ModelParams& params, double b_max,
                             const SolverConfig& config = {}) {
  params.validate();
  config.validate();
  if (!(b_max > 0 && b_max <= 1))
    throw std::invalid_argument("solve_cmdp: B_max must be inside (0,1]");
  if (params.lambda_v <= 0)
    throw std::invalid_argument("solve_cmdp: blocking constraint needs lambda_v > 0");

  const UniformizedModel um = uniformize(params);
  const StateSpace& space = um.space;
  CmdpResult result;
  auto& diag = result.diag;

  auto solve_at = [&](double beta, const std::vector<double>* warm) {
    return value_iteration(um, beta, config, warm);
  };
  auto blocking_of = [&](const Policy& policy) {
    return evaluate_policy_exact(policy, params, space).blocking;
  };

  // constraint slack at beta = 0: the unconstrained optimum already qualifies
  SolveResult base = solve_at(config.beta_init, nullptr);
  double b_base = blocking_of(base.policy);
  diag.beta_trace.push_back(config.beta_init);
  diag.blocking_trace.push_back(b_base);
  diag.b_unconstrained = b_base;
  if (b_base <= b_max) {
    result.policy.low = base.policy;
    result.policy.high = base.policy;
    result.policy.p = 1.0;
    result.policy.beta_star = config.beta_init;
    result.policy.epsilon = 0.0;
    diag.binding = false;
    diag.b_low = diag.b_high = diag.b_mixed = b_base;
    const auto ev = evaluate_policy_exact(base.policy, params, space);
    diag.throughput_mixed = ev.throughput_mbps;
    result.low_solve = base;
    result.high_solve = std::move(base);
    return result;
  }

  double max_f = 0;
  for (double f : um.throughput) max_f = std::max(max_f, f);
  const double beta_cap = 1e4 * std::max(1.0, max_f);

  // feasibility: the maximal-acceptance policy is the cheap bound; when it
  // misses, the capped-multiplier solve gives the blocking floor of the
  // Lagrangian policy family. Whenever WiFi can fill up, overflow data is
  // forced into LTE, so the floor sits strictly above the Erlang-B baseline;
  // a target unattainable by at most beta_tolerance is answered with the
  // closest achievable policy instead of an error.
  const KthResult kth = compute_k_th(params.wifi_curve, params.r_ld_mbps);
  diag.b_min_achievable = blocking_of(maximal_acceptance_policy(space, params, kth.k_th));
  double beta_hi = std::numeric_limits<double>::infinity();
  if (diag.b_min_achievable > b_max) {
    SolveResult capped = solve_at(beta_cap, &base.value.v);
    const double b_cap = blocking_of(capped.policy);
    diag.b_min_achievable = std::min(diag.b_min_achievable, b_cap);
    if (b_cap > b_max + config.beta_tolerance)
      throw InfeasibleConstraintError(diag.b_min_achievable, b_max);
    if (b_cap > b_max) {
      diag.binding = true;
      diag.b_low = diag.b_high = diag.b_mixed = b_cap;
      const auto ev = evaluate_policy_exact(capped.policy, params, space);
      diag.throughput_mixed = ev.throughput_mbps;
      diag.linear_mix_residual = std::abs(b_cap - b_max);
      result.policy.low = capped.policy;
      result.policy.high = capped.policy;
      result.policy.p = 1.0;
      result.policy.beta_star = beta_cap;
      result.policy.epsilon = 0.0;
      result.low_solve = capped;
      result.high_solve = std::move(capped);
      return result;
    }
    beta_hi = beta_cap;  // known to satisfy the constraint
  }

  diag.binding = true;
  double beta_lo = config.beta_init;
  double beta = config.beta_init;
  double gain = 1.0;
  std::vector<double> warm = base.value.v;
  double beta_star = beta;
  for (long k = 1; k <= config.beta_max_iters; ++k) {
    // next multiplier: ascent while unbracketed, bisection afterwards
    if (std::isinf(beta_hi)) {
      const double b_cur = diag.blocking_trace.back();
      beta = std::clamp(beta + gain * (b_cur - b_max) / double(k), 0.0, beta_cap);
      gain *= 2.0;
    } else {
      beta = 0.5 * (beta_lo + beta_hi);
    }
    SolveResult sr = solve_at(beta, &warm);
    warm = sr.value.v;
    const double b_cur = blocking_of(sr.policy);
    diag.beta_trace.push_back(beta);
    diag.blocking_trace.push_back(b_cur);
    diag.beta_iterations = k;
    if (b_cur > b_max)
      beta_lo = std::max(beta_lo, beta);
    else
      beta_hi = std::min(beta_hi, beta);
    if (std::abs(b_cur - b_max) <= config.beta_tolerance) {
      beta_star = beta;
      break;
    }
    if (!std::isinf(beta_hi) && beta_hi - beta_lo <= 1e-9 * std::max(1.0, beta_hi)) {
      beta_star = 0.5 * (beta_lo + beta_hi);
      break;
    }
    beta_star = beta;
  }
  if (std::isinf(beta_hi) && std::abs(diag.blocking_trace.back() - b_max) > config.beta_tolerance) {
    SolverError err("solve_cmdp: multiplier loop failed to bracket beta* within " +
                    std::to_string(diag.beta_iterations) + " iterations (last beta=" +
                    std::to_string(diag.beta_trace.back()) + ")");
    throw err;
  }

  // pure policies at beta* -/+ epsilon; widen epsilon if both land on one side
  double epsilon = config.epsilon > 0 ? config.epsilon : 1e-3 * std::max(1.0, beta_star);
  SolveResult low_solve, high_solve;
  double b_low = 0, b_high = 0;
  for (int attempt = 0;; ++attempt) {
    low_solve = solve_at(std::max(0.0, beta_star - epsilon), &warm);
    high_solve = solve_at(beta_star + epsilon, &warm);
    b_low = blocking_of(low_solve.policy);
    b_high = blocking_of(high_solve.policy);
    if (b_low >= b_max && b_high <= b_max) break;
    if (attempt >= 60)
      throw SolverError("solve_cmdp: could not straddle B_max around beta*=" +
                        std::to_string(beta_star));
    epsilon *= 4.0;
  }
  diag.b_low = b_low;
  diag.b_high = b_high;

  RandomizedPolicy rp;
  rp.low = low_solve.policy;
  rp.high = high_solve.policy;
  rp.beta_star = beta_star;
  rp.epsilon = epsilon;
  // seed from p b_low + (1-p) b_high = B_max, then refine against the exact
  // blocking of the mixture
  double p = b_low > b_high ? (b_max - b_high) / (b_low - b_high) : 1.0;
  p = std::clamp(p, 0.0, 1.0);
  rp.p = p;
  auto mixed_blocking = [&](double prob) {
    RandomizedPolicy candidate = rp;
    candidate.p = prob;
    return evaluate_randomized_exact(candidate, params, space).blocking;
  };
  double b_mixed = mixed_blocking(p);
  if (std::abs(b_mixed - b_max) > 1e-10) {
    double p_sat = 0.0, b_sat = b_high;   // blocking <= B_max at p = 0
    double p_over = 1.0, b_over = b_low;  // blocking >= B_max at p = 1
    for (int it = 0; it < 80 && std::abs(b_mixed - b_max) > 1e-10; ++it) {
      if (b_mixed > b_max) {
        p_over = p;
        b_over = b_mixed;
      } else {
        p_sat = p;
        b_sat = b_mixed;
      }
      // secant within the bracket, falling back to bisection
      double cand = b_over > b_sat
                        ? p_sat + (b_max - b_sat) * (p_over - p_sat) / (b_over - b_sat)
                        : 0.5 * (p_sat + p_over);
      if (!(cand > p_sat && cand < p_over)) cand = 0.5 * (p_sat + p_over);
      p = cand;
      b_mixed = mixed_blocking(p);
    }
    rp.p = p;
  }
  diag.b_mixed = b_mixed;
  diag.linear_mix_residual = std::abs(rp.p * b_low + (1.0 - rp.p) * b_high - b_max);
  diag.throughput_mixed = evaluate_randomized_exact(rp, params, space).throughput_mbps;

  result.policy = std::move(rp);
  result.low_solve = std::move(low_solve);
  result.high_solve = std::move(high_solve);
  return result;
}

}  // namespace hetnet
