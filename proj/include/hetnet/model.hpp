#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/wifi.hpp"

namespace hetnet {

/** Population counts: voice in LTE, data in LTE, data in WiFi. */
struct State {
  int i = 0;
  int j = 0;
  int k = 0;
  friend auto operator<=>(const State&, const State&) = default;
};

inline std::string to_string(const State& s) {
  return "(" + std::to_string(s.i) + "," + std::to_string(s.j) + "," + std::to_string(s.k) + ")";
}

enum class EventKind : int {
  VoiceArrival = 0,
  DataArrival = 1,
  VoiceDepartureLte = 2,
  DataDepartureLte = 3,
  DataDepartureWifi = 4,
};
inline constexpr int kNumEvents = 5;
inline constexpr std::array<EventKind, kNumEvents> kAllEvents = {
    EventKind::VoiceArrival, EventKind::DataArrival, EventKind::VoiceDepartureLte,
    EventKind::DataDepartureLte, EventKind::DataDepartureWifi};

enum class ActionKind : int {
  Block = 0,              // block the arrival / do nothing at a departure
  AcceptLte = 1,          // admit the arriving voice or data user in LTE
  AcceptWifi = 2,         // admit the arriving data user in WiFi
  AcceptVoiceOffload = 3, // admit voice in LTE, pushing one LTE data user to WiFi
  MoveData = 4,           // refill the RAT a user departed from with one data user
};
inline constexpr int kNumActions = 5;

inline const char* event_name(EventKind e) {
  switch (e) {
    case EventKind::VoiceArrival: return "voice_arrival";
    case EventKind::DataArrival: return "data_arrival";
    case EventKind::VoiceDepartureLte: return "voice_departure_lte";
    case EventKind::DataDepartureLte: return "data_departure_lte";
    case EventKind::DataDepartureWifi: return "data_departure_wifi";
  }
  return "?";
}

inline const char* action_name(ActionKind a) {
  switch (a) {
    case ActionKind::Block: return "block";
    case ActionKind::AcceptLte: return "accept_lte";
    case ActionKind::AcceptWifi: return "accept_wifi";
    case ActionKind::AcceptVoiceOffload: return "accept_voice_offload";
    case ActionKind::MoveData: return "move_data";
  }
  return "?";
}

/**
 * Model parameters: Poisson arrival rates, exponential service rates, the
 * LTE common resource pool C shared by voice and data, the WiFi cap W, LTE
 * per-user bit rates, and the WiFi per-user throughput curve (defined at
 * least on 1..W).
 *
 * Arrival rates may be zero (an absent traffic class); service rates must be
 * strictly positive.
 */
struct ModelParams {
  double lambda_v = 0;
  double lambda_d = 0;
  double mu_v = 0;
  double mu_d = 0;
  int C = 0;
  int W = 0;
  double r_lv_mbps = 0;
  double r_ld_mbps = 0;
  ThroughputCurve wifi_curve;

  void validate() const {
    if (lambda_v < 0 || lambda_d < 0)
      throw std::invalid_argument("ModelParams: arrival rates must be nonnegative");
    if (lambda_v + lambda_d <= 0)
      throw std::invalid_argument("ModelParams: at least one arrival rate must be positive");
    if (mu_v <= 0 || mu_d <= 0)
      throw std::invalid_argument("ModelParams: service rates must be positive");
    if (C < 1) throw std::invalid_argument("ModelParams: C must be >= 1");
    if (W < 1) throw std::invalid_argument("ModelParams: W must be >= 1");
    if (r_lv_mbps <= 0 || r_ld_mbps <= 0)
      throw std::invalid_argument("ModelParams: bit rates must be positive");
    if (wifi_curve.k_max() < W)
      throw std::invalid_argument("ModelParams: wifi curve must cover 1..W");
  }
};

/**
 * Dense enumeration of the constraint set {(i,j,k) : i+j <= C, k <= W} in
 * lexicographic (i, j, k) order, with a bijection to indices 0..size()-1.
 * Every dense array in the toolkit uses this order.
 */
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(int C, int W) : C_(C), W_(W) {
    if (C < 1 || W < 1) throw std::invalid_argument("StateSpace: need C >= 1 and W >= 1");
    states_.reserve(size_t((C + 1) * (C + 2) / 2 * (W + 1)));
    row_offset_.resize(size_t(C) + 1);
    for (int i = 0; i <= C; ++i) {
      row_offset_[size_t(i)] = int(states_.size());
      for (int j = 0; i + j <= C; ++j)
        for (int k = 0; k <= W; ++k) states_.push_back({i, j, k});
    }
  }
  explicit StateSpace(const ModelParams& p) : StateSpace(p.C, p.W) {}

  int size() const { return int(states_.size()); }
  int C() const { return C_; }
  int W() const { return W_; }
  const State& state(int idx) const { return states_[size_t(idx)]; }
  const std::vector<State>& states() const { return states_; }

  bool contains(const State& s) const {
    return s.i >= 0 && s.j >= 0 && s.k >= 0 && s.i + s.j <= C_ && s.k <= W_;
  }

  int index(const State& s) const {
    if (!contains(s)) throw std::invalid_argument("StateSpace: state " + to_string(s) + " outside space");
    return row_offset_[size_t(s.i)] + s.j * (W_ + 1) + s.k;
  }

 private:
  int C_ = 0, W_ = 0;
  std::vector<State> states_;
  std::vector<int> row_offset_;
};

/** Rate at which event e fires in state s. Departures scale with population. */
inline double event_rate(const State& s, EventKind e, const ModelParams& p) {
  switch (e) {
    case EventKind::VoiceArrival: return p.lambda_v;
    case EventKind::DataArrival: return p.lambda_d;
    case EventKind::VoiceDepartureLte: return s.i * p.mu_v;
    case EventKind::DataDepartureLte: return s.j * p.mu_d;
    case EventKind::DataDepartureWifi: return s.k * p.mu_d;
  }
  return 0;
}

/**
 * Total event rate v(s) = lambda_v + lambda_d + i mu_v + j mu_d + k mu_d,
 * summed in event order so it equals the event-wise sum exactly.
 */
inline double total_rate(const State& s, const ModelParams& p) {
  return p.lambda_v + p.lambda_d + s.i * p.mu_v + s.j * p.mu_d + s.k * p.mu_d;
}

/** Small fixed-capacity action set; events never admit more than 3 actions. */
struct ActionSet {
  std::array<ActionKind, 3> items{};
  int count = 0;
  void add(ActionKind a) { items[size_t(count++)] = a; }
  bool contains(ActionKind a) const {
    for (int n = 0; n < count; ++n)
      if (items[size_t(n)] == a) return true;
    return false;
  }
  const ActionKind* begin() const { return items.data(); }
  const ActionKind* end() const { return items.data() + count; }
  bool empty() const { return count == 0; }
};

/**
 * Actions allowed when event e occurs in state s. Blocking a voice arrival is
 * allowed everywhere except the empty system; blocking a data arrival only
 * when both RATs are full. Rebalancing after a departure needs a data user on
 * the other side to move.
 */
inline ActionSet feasible_actions(const State& s, EventKind e, const ModelParams& p) {
  ActionSet set;
  switch (e) {
    case EventKind::VoiceArrival:
      if (!(s.i == 0 && s.j == 0 && s.k == 0)) set.add(ActionKind::Block);
      if (s.i + s.j < p.C) set.add(ActionKind::AcceptLte);
      if (s.j >= 1 && s.k < p.W) set.add(ActionKind::AcceptVoiceOffload);
      break;
    case EventKind::DataArrival:
      if (s.i + s.j == p.C && s.k == p.W) set.add(ActionKind::Block);
      if (s.i + s.j < p.C) set.add(ActionKind::AcceptLte);
      if (s.k < p.W) set.add(ActionKind::AcceptWifi);
      break;
    case EventKind::VoiceDepartureLte:
      if (s.i >= 1) set.add(ActionKind::Block);
      if (s.i >= 1 && s.k >= 1) set.add(ActionKind::MoveData);
      break;
    case EventKind::DataDepartureLte:
      if (s.j >= 1) set.add(ActionKind::Block);
      if (s.j >= 1 && s.k >= 1) set.add(ActionKind::MoveData);
      break;
    case EventKind::DataDepartureWifi:
      if (s.k >= 1) set.add(ActionKind::Block);
      if (s.j >= 1 && s.k >= 1) set.add(ActionKind::MoveData);
      break;
  }
  return set;
}

inline bool is_feasible(const State& s, EventKind e, ActionKind a, const ModelParams& p) {
  return feasible_actions(s, e, p).contains(a);
}

/**
 * Feasibility relaxed for fixed baseline policies: the on-the-spot rule
 * refuses a data arrival whenever WiFi is full, even with LTE room, which the
 * optimizer's feasibility sets do not allow. A refused arrival is a no-op,
 * so applying it is always well defined.
 */
inline bool is_admissible(const State& s, EventKind e, ActionKind a, const ModelParams& p) {
  if (e == EventKind::DataArrival && a == ActionKind::Block) return true;
  return is_feasible(s, e, a, p);
}

/** Deterministic successor of (s, e, a). Throws on an inapplicable triple. */
inline State transition(const State& s, EventKind e, ActionKind a, const ModelParams& p) {
  if (!is_admissible(s, e, a, p))
    throw std::invalid_argument(std::string("transition: infeasible triple state=") + to_string(s) +
                                " event=" + event_name(e) + " action=" + action_name(a));
  switch (e) {
    case EventKind::VoiceArrival:
      if (a == ActionKind::Block) return s;
      if (a == ActionKind::AcceptLte) return {s.i + 1, s.j, s.k};
      return {s.i + 1, s.j - 1, s.k + 1};  // AcceptVoiceOffload
    case EventKind::DataArrival:
      if (a == ActionKind::Block) return s;
      if (a == ActionKind::AcceptLte) return {s.i, s.j + 1, s.k};
      return {s.i, s.j, s.k + 1};  // AcceptWifi
    case EventKind::VoiceDepartureLte:
      if (a == ActionKind::Block) return {s.i - 1, s.j, s.k};
      return {s.i - 1, s.j + 1, s.k - 1};  // MoveData: WiFi user takes the freed slot
    case EventKind::DataDepartureLte:
      if (a == ActionKind::Block) return {s.i, s.j - 1, s.k};
      return {s.i, s.j, s.k - 1};  // MoveData: WiFi user replaces the departed one
    case EventKind::DataDepartureWifi:
      if (a == ActionKind::Block) return {s.i, s.j, s.k - 1};
      return {s.i, s.j - 1, s.k};  // MoveData: LTE data user refills WiFi
  }
  throw std::logic_error("transition: unreachable");
}

/** Instantaneous system throughput f(s) = i R_LV + j R_LD + k R_WD(k). */
inline double state_throughput(const State& s, const ModelParams& p) {
  const double wifi = s.k == 0 ? 0.0 : s.k * p.wifi_curve.per_user_mbps(s.k);
  return s.i * p.r_lv_mbps + s.j * p.r_ld_mbps + wifi;
}

/** Reward of a decision: the throughput of the successor state. */
inline double reward(const State& s, EventKind e, ActionKind a, const ModelParams& p) {
  return state_throughput(transition(s, e, a, p), p);
}

/** Unit cost exactly when a voice arrival is blocked. */
inline double cost(const State&, EventKind e, ActionKind a) {
  return (e == EventKind::VoiceArrival && a == ActionKind::Block) ? 1.0 : 0.0;
}

/**
 * A (state, event) pair needs a decision iff the event can fire there:
 * arrivals with positive rate always, departures only with a positive
 * population.
 */
inline bool decision_pair(const State& s, EventKind e, const ModelParams& p) {
  return event_rate(s, e, p) > 0;
}

}  // namespace hetnet
