#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/model.hpp"
#include "hetnet/policy.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

struct SimConfig {
  long horizon_events = 1'000'000;
  long warmup_events = 100'000;
  int replications = 20;
  uint64_t base_seed = 1;

  void validate() const {
    if (horizon_events <= 0 || warmup_events < 0)
      throw std::invalid_argument("SimConfig: event counts must be positive");
    if (warmup_events >= horizon_events)
      throw std::invalid_argument("SimConfig: warmup must be smaller than the horizon");
    if (replications < 1) throw std::invalid_argument("SimConfig: need at least one replication");
  }
};

/**
 * Replication-aggregated estimates: blocking fraction (blocked voice arrivals
 * over voice arrivals) and time-weighted mean throughput, with normal 95%
 * confidence intervals over i.i.d. replications.
 */
struct SimMetrics {
  std::vector<double> blocking_reps;
  std::vector<double> throughput_reps;
  double blocking_mean = 0, blocking_stderr = 0, blocking_ci95 = 0;
  double throughput_mean = 0, throughput_stderr = 0, throughput_ci95 = 0;
};

/** A decision rule; randomized rules draw from the per-replication stream. */
using DecisionFn = std::function<ActionKind(const State&, EventKind, RngStream&)>;

inline DecisionFn make_decision_fn(const Policy& policy, const StateSpace& space) {
  return [policy, space](const State& s, EventKind e, RngStream&) {
    return policy.at(space.index(s), e);
  };
}

/** Algorithm-2 rule: apply rp.low w.p. p, rp.high otherwise, per decision. */
inline DecisionFn make_randomized_decision_fn(const RandomizedPolicy& rp, const StateSpace& space) {
  return [rp, space](const State& s, EventKind e, RngStream& rng) {
    const Policy& pick = rng.bernoulli(rp.p) ? rp.low : rp.high;
    return pick.at(space.index(s), e);
  };
}

/**
 * The on-the-spot baseline: data always to WiFi while it has room, voice
 * always to LTE while the pool has room, no offloading ever.
 */
inline Policy policy_on_the_spot(const StateSpace& space, const ModelParams& p) {
  Policy policy(space.size());
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s = space.state(idx);
    for (EventKind e : kAllEvents) {
      if (!decision_pair(s, e, p)) continue;
      ActionKind a = ActionKind::Block;
      if (e == EventKind::VoiceArrival && s.i + s.j < p.C) a = ActionKind::AcceptLte;
      if (e == EventKind::DataArrival) a = s.k < p.W ? ActionKind::AcceptWifi : ActionKind::Block;
      policy.set(idx, e, a);
    }
  }
  return policy;
}

namespace detail {

struct ReplicationResult {
  double blocking = 0;
  double throughput = 0;
};

inline ReplicationResult simulate_one(const DecisionFn& decide, const ModelParams& params,
                                      const StateSpace& space, const SimConfig& cfg,
                                      uint32_t replication) {
  RngStream events(cfg.base_seed, replication, 0);
  RngStream decisions(cfg.base_seed, replication, 1);
  State s{0, 0, 0};
  double clock = 0, weighted_f = 0;
  long voice_arrivals = 0, voice_blocked = 0;
  for (long n = 0; n < cfg.horizon_events; ++n) {
    const double v = total_rate(s, params);
    const double holding = events.exponential(v);
    // competing exponentials: one categorical draw picks the event
    double u = events.next_double() * v;
    EventKind e = EventKind::DataDepartureWifi;
    for (EventKind cand : kAllEvents) {
      u -= event_rate(s, cand, params);
      if (u < 0) {
        e = cand;
        break;
      }
    }
    const ActionKind a = decide(s, e, decisions);
    if (!is_admissible(s, e, a, params))
      throw std::runtime_error(std::string("simulate: policy returned infeasible action ") +
                               action_name(a) + " at state " + to_string(s) + " event " +
                               event_name(e));
    const State next = transition(s, e, a, params);
    if (!space.contains(next))
      throw std::logic_error("simulate: left the state space at " + to_string(next));
    if (n >= cfg.warmup_events) {
      clock += holding;
      weighted_f += state_throughput(s, params) * holding;
      if (e == EventKind::VoiceArrival) {
        ++voice_arrivals;
        if (a == ActionKind::Block) ++voice_blocked;
      }
    }
    s = next;
  }
  ReplicationResult r;
  r.blocking = voice_arrivals > 0 ? double(voice_blocked) / double(voice_arrivals) : 0.0;
  r.throughput = clock > 0 ? weighted_f / clock : 0.0;
  return r;
}

inline void aggregate(const std::vector<double>& xs, double& mean, double& stderr_out,
                      double& ci95) {
  const size_t n = xs.size();
  double sum = 0;
  for (double x : xs) sum += x;
  mean = sum / double(n);
  if (n < 2) {
    stderr_out = 0;
    ci95 = 0;
    return;
  }
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  stderr_out = std::sqrt(ss / double(n - 1) / double(n));
  ci95 = 1.96 * stderr_out;
}

}  // namespace detail

/**
 * Event-driven simulation of the controlled chain under an arbitrary decision
 * rule: exponential holding at rate v(s), categorical event draw, policy
 * query, deterministic transition. Replications run on independent Philox
 * streams; (base_seed, replication) reproduces trajectories bit-exactly.
 */
inline SimMetrics simulate(const DecisionFn& decide, const ModelParams& params,
                           const SimConfig& cfg) {
  params.validate();
  cfg.validate();
  const StateSpace space(params);
  SimMetrics m;
  m.blocking_reps.reserve(size_t(cfg.replications));
  m.throughput_reps.reserve(size_t(cfg.replications));
  for (int rep = 0; rep < cfg.replications; ++rep) {
    const auto r = detail::simulate_one(decide, params, space, cfg, uint32_t(rep));
    m.blocking_reps.push_back(r.blocking);
    m.throughput_reps.push_back(r.throughput);
  }
  detail::aggregate(m.blocking_reps, m.blocking_mean, m.blocking_stderr, m.blocking_ci95);
  detail::aggregate(m.throughput_reps, m.throughput_mean, m.throughput_stderr, m.throughput_ci95);
  return m;
}

inline SimMetrics simulate(const Policy& policy, const ModelParams& params, const SimConfig& cfg) {
  const StateSpace space(params);
  validate_policy(policy, space, params);
  return simulate(make_decision_fn(policy, space), params, cfg);
}

}  // namespace hetnet
