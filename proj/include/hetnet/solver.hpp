#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/model.hpp"
#include "hetnet/policy.hpp"

namespace hetnet {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
  double last_span = std::numeric_limits<double>::quiet_NaN();
};

/**
 * Discrete-time equivalent of the controlled continuous-time chain. With step
 *
 *   delta = 1 / (lambda_v + lambda_d + C mu_v + (C+W) mu_d)
 *
 * every event becomes a per-step probability p_hat(s,e) = rate(s,e) * delta
 * and the remainder 1 - sum_e p_hat(s,e) is a self-loop. delta bounds
 * 1/max_s v(s) from below, so all probabilities are valid and stationary
 * policies coincide with the continuous-time ones. Rewards and costs carry
 * over unchanged (reward_hat = reward, cost_hat = cost).
 */
struct UniformizedModel {
  StateSpace space;
  ModelParams params;
  double delta = 0;

  struct Arc {
    ActionKind action;
    int32_t next;
  };
  struct ArcList {
    std::array<Arc, 3> items{};
    int count = 0;
    const Arc* begin() const { return items.data(); }
    const Arc* end() const { return items.data() + count; }
  };

  std::vector<std::array<double, kNumEvents>> event_prob;  // p_hat(s,e)
  std::vector<double> self_loop;                           // 1 - sum_e p_hat(s,e)
  std::vector<double> throughput;                          // f(s)
  std::vector<std::array<ArcList, kNumEvents>> arcs;       // feasibility table

  double reward_hat(int state_idx, EventKind e, ActionKind a) const {
    return state_throughput(transition(space.state(state_idx), e, a, params), params);
  }
  double cost_hat(EventKind e, ActionKind a) const {
    return (e == EventKind::VoiceArrival && a == ActionKind::Block) ? 1.0 : 0.0;
  }
};

inline UniformizedModel uniformize(const ModelParams& params) {
  params.validate();
  UniformizedModel um;
  um.space = StateSpace(params);
  um.params = params;
  um.delta = 1.0 / (params.lambda_v + params.lambda_d + params.C * params.mu_v +
                    (params.C + params.W) * params.mu_d);
  const int n = um.space.size();
  um.event_prob.resize(size_t(n));
  um.self_loop.resize(size_t(n));
  um.throughput.resize(size_t(n));
  um.arcs.resize(size_t(n));
  for (int idx = 0; idx < n; ++idx) {
    const State& s = um.space.state(idx);
    um.throughput[size_t(idx)] = state_throughput(s, params);
    double total = 0;
    for (EventKind e : kAllEvents) {
      const double prob = event_rate(s, e, params) * um.delta;
      um.event_prob[size_t(idx)][size_t(int(e))] = prob;
      total += prob;
      auto& list = um.arcs[size_t(idx)][size_t(int(e))];
      if (prob > 0) {
        for (ActionKind a : feasible_actions(s, e, params))
          list.items[size_t(list.count++)] = {a, um.space.index(transition(s, e, a, params))};
        if (list.count == 0)
          throw std::logic_error("uniformize: no feasible action for live event at " + to_string(s));
      }
    }
    um.self_loop[size_t(idx)] = 1.0 - total;
  }
  return um;
}

enum class TieBreak { LowestIndex, HighestIndex };

/**
 * Solver knobs. The value iteration stops when the span seminorm of the
 * Bellman difference drops to via_tolerance * max(1, |per-step gain|); the
 * multiplier loop stops when |B - B_max| <= beta_tolerance or the bracket
 * around beta* collapses. epsilon <= 0 requests the default perturbation
 * 1e-3 * max(1, beta*). Ties in the action maximization are broken by fixed
 * action index order (tie_break).
 */
struct SolverConfig {
  double via_tolerance = 1e-9;
  long via_max_iters = 5'000'000;
  double beta_init = 0.0;
  double beta_tolerance = 1e-5;
  long beta_max_iters = 400;
  double epsilon = 0.0;
  TieBreak tie_break = TieBreak::LowestIndex;

  void validate() const {
    if (via_tolerance <= 0 || beta_tolerance <= 0)
      throw std::invalid_argument("SolverConfig: tolerances must be positive");
    if (via_max_iters < 1 || beta_max_iters < 1)
      throw std::invalid_argument("SolverConfig: iteration caps must be positive");
    if (beta_init < 0) throw std::invalid_argument("SolverConfig: beta_init must be >= 0");
  }
};

/** Relative value function around the empty state, with the gain estimate. */
struct ValueFunction {
  std::vector<double> v;  // v[index of (0,0,0)] == 0
  double g = 0;           // average reward per unit time (Mbps)
  long iterations = 0;
  double span_residual = 0;
};

struct SolveResult {
  ValueFunction value;
  Policy policy;
  double g = 0;
  long span_monotonicity_violations = 0;  // increases of the span after burn-in
};

namespace detail {

struct SweepStats {
  double span = 0;
  double g_step = 0;  // per-step gain estimate, (max+min)/2 of the difference
};

/**
 * One uniformized Bellman sweep for the average-reward problem with the
 * blocking cost weighted by beta:
 *
 *   w(s) = delta f(s) + sum_e p_hat(s,e) max_a [ -beta c_hat(e,a) + v(s'_a) ]
 *        + self_loop(s) v(s)
 *
 * The running state earns its throughput for the whole step (so the gain is
 * the time average of f), costs stay lumped at blocking decisions, and the
 * result is shifted so w(0,0,0) = 0 (relative value iteration). The greedy
 * argmax is recorded when `greedy` is given.
 */
inline SweepStats bellman_sweep(const UniformizedModel& um, double beta, TieBreak tie_break,
                                const std::vector<double>& v, std::vector<double>& w,
                                Policy* greedy) {
  const int n = um.space.size();
  double max_diff = -std::numeric_limits<double>::infinity();
  double min_diff = std::numeric_limits<double>::infinity();
  for (int idx = 0; idx < n; ++idx) {
    double acc = um.delta * um.throughput[size_t(idx)] + um.self_loop[size_t(idx)] * v[size_t(idx)];
    for (int e = 0; e < kNumEvents; ++e) {
      const double prob = um.event_prob[size_t(idx)][size_t(e)];
      if (prob <= 0) continue;
      const auto& list = um.arcs[size_t(idx)][size_t(e)];
      double best = -std::numeric_limits<double>::infinity();
      ActionKind best_action = ActionKind::Block;
      for (const auto& arc : list) {
        double q = v[size_t(arc.next)];
        if (e == int(EventKind::VoiceArrival) && arc.action == ActionKind::Block) q -= beta;
        const bool better = tie_break == TieBreak::LowestIndex ? q > best : q >= best;
        if (better) {
          best = q;
          best_action = arc.action;
        }
      }
      acc += prob * best;
      if (greedy) greedy->set(idx, EventKind(e), best_action);
    }
    if (!std::isfinite(acc))
      throw SolverError("value iteration: non-finite value at state " +
                        to_string(um.space.state(idx)));
    w[size_t(idx)] = acc;
    const double diff = acc - v[size_t(idx)];
    max_diff = std::max(max_diff, diff);
    min_diff = std::min(min_diff, diff);
  }
  const double shift = w[0];  // index 0 is (0,0,0)
  for (double& x : w) x -= shift;
  return {max_diff - min_diff, 0.5 * (max_diff + min_diff)};
}

}  // namespace detail

/**
 * Single Bellman update (the building block of the value iteration), exposed
 * for inspection: returns the shifted next iterate, the greedy policy of the
 * update, and the span/gain statistics.
 */
struct BellmanUpdate {
  std::vector<double> next;
  Policy greedy;
  double span = 0;
  double g_step = 0;
};

inline BellmanUpdate bellman_update(const std::vector<double>& v, const UniformizedModel& um,
                                    double beta, TieBreak tie_break = TieBreak::LowestIndex) {
  if (int(v.size()) != um.space.size())
    throw std::invalid_argument("bellman_update: value vector size mismatch");
  BellmanUpdate out;
  out.next.resize(v.size());
  out.greedy = Policy(um.space.size());
  const auto stats = detail::bellman_sweep(um, beta, tie_break, v, out.next, &out.greedy);
  out.span = stats.span;
  out.g_step = stats.g_step;
  return out;
}

/**
 * Relative value iteration on the uniformized chain for a fixed multiplier
 * beta. Converges when the span of the Bellman difference is below
 * via_tolerance * max(1, |g_step|); the gain per unit time is the per-step
 * gain divided by delta. The returned policy is greedy with respect to the
 * final value function.
 */
inline SolveResult value_iteration(const UniformizedModel& um, double beta,
                                   const SolverConfig& config,
                                   const std::vector<double>* warm_start = nullptr) {
  config.validate();
  const int n = um.space.size();
  std::vector<double> v(size_t(n), 0.0);
  if (warm_start) {
    if (int(warm_start->size()) != n)
      throw std::invalid_argument("value_iteration: warm start size mismatch");
    v = *warm_start;
    const double shift = v[0];
    for (double& x : v) x -= shift;
  }
  std::vector<double> w(static_cast<size_t>(n));

  SolveResult result;
  double prev_span = std::numeric_limits<double>::infinity();
  const long burn_in = n;
  long iter = 0;
  bool converged = false;
  double g_step = 0;
  while (iter < config.via_max_iters) {
    const auto stats = detail::bellman_sweep(um, beta, config.tie_break, v, w, nullptr);
    ++iter;
    v.swap(w);
    g_step = stats.g_step;
    if (iter > burn_in && stats.span > prev_span + 10.0 * config.via_tolerance)
      ++result.span_monotonicity_violations;
    prev_span = stats.span;
    if (stats.span <= config.via_tolerance * std::max(1.0, std::abs(g_step))) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    SolverError err("value iteration: no convergence after " + std::to_string(iter) +
                    " sweeps, span=" + std::to_string(prev_span));
    err.last_span = prev_span;
    throw err;
  }

  // one extra sweep to make the policy greedy w.r.t. the final values
  result.policy = Policy(n);
  detail::bellman_sweep(um, beta, config.tie_break, v, w, &result.policy);

  result.value.v = std::move(v);
  result.value.g = g_step / um.delta;
  result.value.iterations = iter;
  result.value.span_residual = prev_span;
  result.g = result.value.g;
  return result;
}

/** Unconstrained throughput maximization: value iteration at beta = 0. */
inline SolveResult solve_unconstrained(const ModelParams& params, const SolverConfig& config = {}) {
  return value_iteration(uniformize(params), 0.0, config);
}

}  // namespace hetnet
