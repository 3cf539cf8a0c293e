#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/model.hpp"
#include "hetnet/policy.hpp"
#include "hetnet/solver.hpp"

namespace hetnet {

/**
 * Exact long-run behaviour of the chain induced by a policy: stationary
 * distribution restricted to the recurrent class of the empty state,
 * time-average throughput E[f], and voice blocking probability (stationary
 * mass of the states whose voice-arrival decision is Block; Poisson arrivals
 * see time averages).
 */
struct PolicyEvaluation {
  std::vector<double> stationary;  // dense over the space,零 on transient states
  std::vector<int> recurrent_class;
  double throughput_mbps = 0;  // E_pi[f]
  double blocking = 0;         // P(voice arrival blocked)
  double blocked_rate = 0;     // lambda_v * blocking, the cost rate
  double solve_residual = 0;   // ||pi Q||_inf of the stationary solve
  double pasta_residual = 0;   // |blocking - (1 - mu_v E[i] / lambda_v)|
};

namespace detail {

/** Distribution over actions for one decision pair; at most two entries. */
struct ActionMix {
  std::array<std::pair<ActionKind, double>, 2> entries{};
  int count = 0;
  void add(ActionKind a, double w) {
    if (w <= 0) return;
    for (int n = 0; n < count; ++n)
      if (entries[size_t(n)].first == a) {
        entries[size_t(n)].second += w;
        return;
      }
    entries[size_t(count++)] = {a, w};
  }
  const std::pair<ActionKind, double>* begin() const { return entries.data(); }
  const std::pair<ActionKind, double>* end() const { return entries.data() + count; }
};

using MixFn = std::function<ActionMix(int state_idx, const State&, EventKind)>;

inline PolicyEvaluation evaluate_mix(const MixFn& mix, const ModelParams& params,
                                     const StateSpace& space) {
  params.validate();
  const int n = space.size();

  // reachable set from the empty state; departures drain every state back to
  // it, so this is exactly the recurrent class
  std::vector<char> reachable(size_t(n), 0);
  std::vector<int> order;
  order.reserve(size_t(n));
  reachable[0] = 1;
  order.push_back(0);
  for (size_t head = 0; head < order.size(); ++head) {
    const int idx = order[head];
    const State& s = space.state(idx);
    for (EventKind e : kAllEvents) {
      if (event_rate(s, e, params) <= 0) continue;
      for (const auto& [action, weight] : mix(idx, s, e)) {
        const int next = space.index(transition(s, e, action, params));
        if (!reachable[size_t(next)]) {
          reachable[size_t(next)] = 1;
          order.push_back(next);
        }
      }
    }
  }

  std::vector<int> dense_of(order);
  std::sort(dense_of.begin(), dense_of.end());
  const int m = int(dense_of.size());
  std::vector<int> rank(size_t(n), -1);
  for (int r = 0; r < m; ++r) rank[size_t(dense_of[size_t(r)])] = r;

  // generator on the recurrent class
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(m, m);
  std::vector<double> block_weight(size_t(m), 0.0);  // P(action = Block | voice arrival)
  for (int r = 0; r < m; ++r) {
    const int idx = dense_of[size_t(r)];
    const State& s = space.state(idx);
    for (EventKind e : kAllEvents) {
      const double rate = event_rate(s, e, params);
      if (rate <= 0) continue;
      for (const auto& [action, weight] : mix(idx, s, e)) {
        const int next = space.index(transition(s, e, action, params));
        if (e == EventKind::VoiceArrival && action == ActionKind::Block)
          block_weight[size_t(r)] += weight;
        if (next == idx) continue;
        const int rn = rank[size_t(next)];
        if (rn < 0) throw std::logic_error("evaluate: recurrent class not closed");
        Q(r, rn) += rate * weight;
        Q(r, r) -= rate * weight;
      }
    }
  }

  // pi Q = 0, sum pi = 1: transpose, replace the first equation by the
  // normalization (the dropped balance equation is redundant)
  Eigen::MatrixXd A = Q.transpose();
  A.row(0).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(0) = 1.0;
  Eigen::VectorXd pi = A.partialPivLu().solve(b);

  const double residual = (pi.transpose() * Q).cwiseAbs().maxCoeff();
  const double mass_err = std::abs(pi.sum() - 1.0);
  if (!(residual <= 1e-12) || !(mass_err <= 1e-12)) {
    Eigen::FullPivLU<Eigen::MatrixXd> full(A);
    pi = full.solve(b);
    const double res2 = (pi.transpose() * Q).cwiseAbs().maxCoeff();
    if (!(res2 <= 1e-12) || !(std::abs(pi.sum() - 1.0) <= 1e-12))
      throw std::runtime_error("evaluate: stationary solve residual " + std::to_string(res2) +
                               " exceeds 1e-12");
  }

  PolicyEvaluation out;
  out.stationary.assign(size_t(n), 0.0);
  out.recurrent_class = dense_of;
  double mean_i = 0;
  for (int r = 0; r < m; ++r) {
    const int idx = dense_of[size_t(r)];
    const double prob = pi(r);
    out.stationary[size_t(idx)] = prob;
    out.throughput_mbps += prob * state_throughput(space.state(idx), params);
    out.blocking += prob * block_weight[size_t(r)];
    mean_i += prob * space.state(idx).i;
  }
  out.blocked_rate = params.lambda_v * out.blocking;
  out.solve_residual = (pi.transpose() * Q).cwiseAbs().maxCoeff();
  // flow balance: every admitted voice user departs, so
  // lambda_v (1 - B) = mu_v E[i]
  if (params.lambda_v > 0)
    out.pasta_residual = std::abs(out.blocking - (1.0 - params.mu_v * mean_i / params.lambda_v));
  return out;
}

}  // namespace detail

inline PolicyEvaluation evaluate_policy_exact(const Policy& policy, const ModelParams& params,
                                              const StateSpace& space) {
  validate_policy(policy, space, params);
  return detail::evaluate_mix(
      [&](int idx, const State&, EventKind e) {
        detail::ActionMix mix;
        mix.add(policy.at(idx, e), 1.0);
        return mix;
      },
      params, space);
}

inline PolicyEvaluation evaluate_policy_exact(const Policy& policy, const ModelParams& params) {
  return evaluate_policy_exact(policy, params, StateSpace(params));
}

/** Exact evaluation of the per-decision mixture of rp.low / rp.high. */
inline PolicyEvaluation evaluate_randomized_exact(const RandomizedPolicy& rp,
                                                  const ModelParams& params,
                                                  const StateSpace& space) {
  validate_policy(rp.low, space, params);
  validate_policy(rp.high, space, params);
  if (rp.p < 0 || rp.p > 1)
    throw std::invalid_argument("evaluate_randomized_exact: p outside [0,1]");
  return detail::evaluate_mix(
      [&](int idx, const State&, EventKind e) {
        detail::ActionMix mix;
        mix.add(rp.low.at(idx, e), rp.p);
        mix.add(rp.high.at(idx, e), 1.0 - rp.p);
        return mix;
      },
      params, space);
}

/** Erlang-B blocking probability of an M/M/C/C loss system at offered load a. */
inline double erlang_b(int servers, double offered_load) {
  if (servers < 1) throw std::invalid_argument("erlang_b: need at least one server");
  if (offered_load <= 0) throw std::invalid_argument("erlang_b: offered load must be positive");
  double b = 1.0;
  for (int n = 1; n <= servers; ++n) b = offered_load * b / (n + offered_load * b);
  return b;
}

/**
 * Exhaustive enumeration of deterministic stationary policies. Guarded: the
 * number of policies (the product of feasible-set sizes over decision pairs)
 * must not exceed 1e7.
 */
class PolicyEnumerator {
 public:
  PolicyEnumerator(const ModelParams& params, const StateSpace& space)
      : params_(params), space_(space) {
    params.validate();
    double product = 1;
    for (int idx = 0; idx < space.size(); ++idx) {
      const State& s = space.state(idx);
      for (EventKind e : kAllEvents) {
        if (!decision_pair(s, e, params)) continue;
        const ActionSet set = feasible_actions(s, e, params);
        slots_.push_back({idx, e, set});
        product *= set.count;
        if (product > kGuard)
          throw std::invalid_argument(
              "enumerate_policies: instance too large, policy count exceeds 1e7 (product >= " +
              std::to_string(product) + ")");
      }
    }
    count_ = product;
  }

  explicit PolicyEnumerator(const ModelParams& params)
      : PolicyEnumerator(params, StateSpace(params)) {}

  double count() const { return count_; }

  /** Writes the next policy; returns false when the sequence is exhausted. */
  bool next(Policy& out) {
    if (done_) return false;
    if (digits_.empty()) digits_.assign(slots_.size(), 0);
    out = Policy(space_.size());
    for (size_t n = 0; n < slots_.size(); ++n)
      out.set(slots_[n].state_idx, slots_[n].event, slots_[n].actions.items[size_t(digits_[n])]);
    // odometer increment, last slot fastest
    for (size_t n = slots_.size(); n-- > 0;) {
      if (++digits_[n] < slots_[n].actions.count) return true;
      digits_[n] = 0;
    }
    done_ = true;
    return true;
  }

  const StateSpace& space() const { return space_; }

 private:
  static constexpr double kGuard = 1e7;
  struct Slot {
    int state_idx;
    EventKind event;
    ActionSet actions;
  };
  ModelParams params_;
  StateSpace space_;
  std::vector<Slot> slots_;
  std::vector<int> digits_;
  double count_ = 1;
  bool done_ = false;
};

inline PolicyEnumerator enumerate_policies(const ModelParams& params) {
  return PolicyEnumerator(params);
}

struct BruteForceResult {
  Policy policy;
  double value = -std::numeric_limits<double>::infinity();
  double throughput_mbps = 0;
  double blocking = 0;
  double policies_evaluated = 0;
};

/**
 * Ground-truth optimum by exhaustive search: evaluates every deterministic
 * policy exactly and maximizes throughput - beta * blocked-arrival-rate.
 * First maximizer in enumeration order wins ties.
 */
inline BruteForceResult brute_force_optimal(const ModelParams& params, double beta) {
  PolicyEnumerator enumerator(params);
  const StateSpace& space = enumerator.space();
  BruteForceResult best;
  Policy policy;
  while (enumerator.next(policy)) {
    const PolicyEvaluation ev = evaluate_policy_exact(policy, params, space);
    const double value = ev.throughput_mbps - beta * ev.blocked_rate;
    best.policies_evaluated += 1;
    if (value > best.value) {
      best.value = value;
      best.policy = policy;
      best.throughput_mbps = ev.throughput_mbps;
      best.blocking = ev.blocking;
    }
  }
  return best;
}

/**
 * Independent check of the uniformization equivalence: stationary vector of
 * the discrete chain P = I + delta Q by power iteration, and the per-unit-time
 * reward/cost it implies. Matches the continuous-time evaluator on every
 * state for any fixed policy.
 */
struct DtmcEvaluation {
  std::vector<double> stationary;
  double reward_per_time = 0;  // E[f]
  double cost_per_time = 0;    // lambda_v * P(block)
  long iterations = 0;
};

inline DtmcEvaluation evaluate_policy_dtmc(const Policy& policy, const ModelParams& params,
                                           const StateSpace& space, double tol = 1e-13,
                                           long max_iters = 2'000'000) {
  validate_policy(policy, space, params);
  const UniformizedModel um = uniformize(params);
  const int n = space.size();
  std::vector<double> pi(static_cast<size_t>(n), 1.0 / n), next(static_cast<size_t>(n));
  DtmcEvaluation out;
  for (long it = 0; it < max_iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int idx = 0; idx < n; ++idx) {
      const double mass = pi[size_t(idx)];
      if (mass == 0) continue;
      double stay = um.self_loop[size_t(idx)];
      const State& s = space.state(idx);
      for (EventKind e : kAllEvents) {
        const double prob = um.event_prob[size_t(idx)][size_t(int(e))];
        if (prob <= 0) continue;
        const int tgt = space.index(transition(s, e, policy.at(idx, e), params));
        if (tgt == idx)
          stay += prob;
        else
          next[size_t(tgt)] += mass * prob;
      }
      next[size_t(idx)] += mass * stay;
    }
    double norm = 0, delta_inf = 0;
    for (double x : next) norm += x;
    for (size_t s = 0; s < next.size(); ++s) {
      next[s] /= norm;
      delta_inf = std::max(delta_inf, std::abs(next[s] - pi[s]));
    }
    pi.swap(next);
    out.iterations = it + 1;
    if (delta_inf <= tol) break;
  }
  out.stationary = pi;
  for (int idx = 0; idx < n; ++idx) {
    const State& s = space.state(idx);
    out.reward_per_time += pi[size_t(idx)] * state_throughput(s, params);
    if (decision_pair(s, EventKind::VoiceArrival, params) &&
        policy.at(idx, EventKind::VoiceArrival) == ActionKind::Block)
      out.cost_per_time += pi[size_t(idx)] * params.lambda_v;
  }
  return out;
}

}  // namespace hetnet
