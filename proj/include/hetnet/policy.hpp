#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hetnet/model.hpp"

namespace hetnet {

/**
 * Stationary deterministic policy: one action per (state, event) decision
 * pair. Pairs that never need a decision (zero-rate departures) stay unset.
 */
class Policy {
 public:
  Policy() = default;
  explicit Policy(int num_states) : choice_(size_t(num_states), unset_row()) {}

  bool defined(int state_idx, EventKind e) const {
    return choice_[size_t(state_idx)][size_t(int(e))] >= 0;
  }

  ActionKind at(int state_idx, EventKind e) const {
    const int8_t v = choice_[size_t(state_idx)][size_t(int(e))];
    if (v < 0)
      throw std::logic_error("Policy: no action set for state index " + std::to_string(state_idx) +
                             " event " + event_name(e));
    return ActionKind(v);
  }

  void set(int state_idx, EventKind e, ActionKind a) {
    choice_[size_t(state_idx)][size_t(int(e))] = int8_t(int(a));
  }

  int num_states() const { return int(choice_.size()); }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  static std::array<int8_t, kNumEvents> unset_row() { return {-1, -1, -1, -1, -1}; }
  std::vector<std::array<int8_t, kNumEvents>> choice_;
};

/**
 * Mixture of two pure policies: at every decision epoch `low` (solved at
 * beta*-epsilon) is applied with probability p, `high` (beta*+epsilon) with
 * probability 1-p.
 */
struct RandomizedPolicy {
  Policy low;
  Policy high;
  double p = 1.0;
  double beta_star = 0.0;
  double epsilon = 0.0;
};

/** Throws unless every decision pair has a feasible action assigned. */
inline void validate_policy(const Policy& policy, const StateSpace& space, const ModelParams& p) {
  if (policy.num_states() != space.size())
    throw std::invalid_argument("validate_policy: policy sized for a different state space");
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s = space.state(idx);
    for (EventKind e : kAllEvents) {
      if (!decision_pair(s, e, p)) continue;
      if (!policy.defined(idx, e))
        throw std::invalid_argument("validate_policy: no action for state " + to_string(s) +
                                    " event " + event_name(e));
      if (!is_admissible(s, e, policy.at(idx, e), p))
        throw std::invalid_argument("validate_policy: infeasible action " +
                                    std::string(action_name(policy.at(idx, e))) + " for state " +
                                    to_string(s) + " event " + event_name(e));
    }
  }
}

}  // namespace hetnet
