#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "hetnet/model.hpp"
#include "hetnet/wifi.hpp"

using namespace hetnet;

namespace {

ModelParams tiny_params(int C = 1, int W = 1) {
  ModelParams p;
  p.lambda_v = 1.0 / 6.0;
  p.lambda_d = 1.0 / 20.0;
  p.mu_v = 1.0 / 60.0;
  p.mu_d = 1.0 / 10.0;
  p.C = C;
  p.W = W;
  p.r_lv_mbps = 0.02;
  p.r_ld_mbps = 5.0;
  std::vector<std::pair<int, double>> rows;
  for (int k = 1; k <= W; ++k) rows.emplace_back(k, 20.0 / k - 0.5 * k);
  p.wifi_curve = table_curve(rows);
  return p;
}

ModelParams reference_like_params() {
  ModelParams p = tiny_params(10, 1);
  p.wifi_curve = bianchi_curve(WifiParams{}, 16);
  p.W = compute_W(p.wifi_curve, 3.5);
  return p;
}

}  // namespace

TEST_CASE("state enumeration is lexicographic and bijective", "[model]") {
  const StateSpace space(1, 1);
  REQUIRE(space.size() == 6);
  const State expected[] = {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 1}, {1, 0, 0}, {1, 0, 1}};
  for (int idx = 0; idx < 6; ++idx) {
    CHECK(space.state(idx) == expected[idx]);
    CHECK(space.index(expected[idx]) == idx);
  }
  CHECK_THROWS_AS(space.index({2, 0, 0}), std::invalid_argument);
}

TEST_CASE("state count at the reference configuration", "[model]") {
  const ModelParams p = reference_like_params();
  REQUIRE(p.W == 7);
  const StateSpace space(p);
  // sum over i of (C-i+1) rows in (i,j), times W+1 WiFi levels
  CHECK(space.size() == 66 * (p.W + 1));
}

TEST_CASE("parameter validation rejects degenerate configurations", "[model]") {
  CHECK_THROWS_AS(tiny_params(0, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(tiny_params(1, 0).validate(), std::invalid_argument);
  ModelParams p = tiny_params();
  p.mu_v = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = tiny_params();
  p.lambda_v = p.lambda_d = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = tiny_params();
  p.lambda_d = 0;  // a single traffic class is fine
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("event rates and their sum", "[model]") {
  const ModelParams p = tiny_params(5, 4);
  const State empty{0, 0, 0};
  CHECK(event_rate(empty, EventKind::VoiceDepartureLte, p) == 0.0);
  CHECK(event_rate(empty, EventKind::DataDepartureLte, p) == 0.0);
  CHECK(event_rate(empty, EventKind::DataDepartureWifi, p) == 0.0);

  const State s{2, 1, 3};
  CHECK(event_rate(s, EventKind::VoiceDepartureLte, p) == 2.0 / 60.0);
  CHECK(total_rate(s, p) ==
        Catch::Approx(1.0 / 6 + 1.0 / 20 + 2.0 / 60 + 4.0 / 10).epsilon(1e-15));

  const StateSpace space(p);
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& t = space.state(idx);
    double sum = 0;
    for (EventKind e : kAllEvents) sum += event_rate(t, e, p);
    CHECK(sum == total_rate(t, p));  // exact arithmetic identity
  }
}

TEST_CASE("feasibility sets at the named corners", "[model]") {
  const ModelParams p = tiny_params(3, 2);

  // empty system: blocking a voice arrival is not allowed
  const ActionSet empty_voice = feasible_actions({0, 0, 0}, EventKind::VoiceArrival, p);
  CHECK(empty_voice.count == 1);
  CHECK(empty_voice.contains(ActionKind::AcceptLte));

  // full pool with no LTE data: only blocking remains for voice
  const ActionSet full_voice = feasible_actions({3, 0, 1}, EventKind::VoiceArrival, p);
  CHECK(full_voice.count == 1);
  CHECK(full_voice.contains(ActionKind::Block));

  // data is blocked exactly when both RATs are full
  const ActionSet full_data = feasible_actions({1, 2, 2}, EventKind::DataArrival, p);
  CHECK(full_data.count == 1);
  CHECK(full_data.contains(ActionKind::Block));
  const ActionSet data_room = feasible_actions({1, 2, 1}, EventKind::DataArrival, p);
  CHECK_FALSE(data_room.contains(ActionKind::Block));
  CHECK(data_room.contains(ActionKind::AcceptWifi));
}

TEST_CASE("every live event has at least one feasible action", "[model]") {
  const ModelParams p = tiny_params(4, 3);
  const StateSpace space(p);
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s = space.state(idx);
    for (EventKind e : kAllEvents)
      if (event_rate(s, e, p) > 0) CHECK_FALSE(feasible_actions(s, e, p).empty());
  }
}

TEST_CASE("transitions follow the deterministic table", "[model]") {
  const ModelParams p = tiny_params(5, 4);
  CHECK(transition({2, 1, 0}, EventKind::VoiceArrival, ActionKind::AcceptLte, p) ==
        State{3, 1, 0});
  CHECK(transition({2, 1, 3}, EventKind::VoiceArrival, ActionKind::AcceptVoiceOffload, p) ==
        State{3, 0, 4});
  CHECK(transition({2, 1, 3}, EventKind::VoiceDepartureLte, ActionKind::MoveData, p) ==
        State{1, 2, 2});
  CHECK(transition({2, 1, 3}, EventKind::DataDepartureLte, ActionKind::MoveData, p) ==
        State{2, 1, 2});
  CHECK(transition({2, 1, 3}, EventKind::DataDepartureWifi, ActionKind::MoveData, p) ==
        State{2, 0, 3});
  CHECK(transition({2, 1, 3}, EventKind::DataDepartureWifi, ActionKind::Block, p) ==
        State{2, 1, 2});
  CHECK_THROWS_AS(transition({0, 0, 0}, EventKind::VoiceArrival, ActionKind::Block, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(transition({5, 0, 0}, EventKind::VoiceArrival, ActionKind::AcceptLte, p),
                  std::invalid_argument);
}

TEST_CASE("transitions never leave the state space", "[model]") {
  const ModelParams p = tiny_params(3, 2);
  const StateSpace space(p);
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s = space.state(idx);
    for (EventKind e : kAllEvents)
      for (ActionKind a : feasible_actions(s, e, p)) CHECK(space.contains(transition(s, e, a, p)));
  }
}

TEST_CASE("reward is the successor throughput", "[model]") {
  const ModelParams p = tiny_params(3, 2);
  // first data user in WiFi earns the k=1 point of the curve
  CHECK(reward({0, 0, 0}, EventKind::DataArrival, ActionKind::AcceptWifi, p) ==
        Catch::Approx(p.wifi_curve.per_user_mbps(1)));
  // the displayed arrival formula
  const State s{1, 1, 1};
  CHECK(reward(s, EventKind::DataArrival, ActionKind::AcceptLte, p) ==
        Catch::Approx(1 * p.r_lv_mbps + 2 * p.r_ld_mbps + 1 * p.wifi_curve.per_user_mbps(1)));
  // an emptying system is worthless
  CHECK(reward({1, 0, 0}, EventKind::VoiceDepartureLte, ActionKind::Block, p) == 0.0);

  // definition cross-check against an independent evaluation of f
  const StateSpace space(p);
  auto f = [&](const State& t) {
    double wifi = 0;
    for (int n = 1; n <= t.k; ++n) wifi += p.wifi_curve.per_user_mbps(t.k);
    return t.i * p.r_lv_mbps + t.j * p.r_ld_mbps + wifi;
  };
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s2 = space.state(idx);
    for (EventKind e : kAllEvents)
      for (ActionKind a : feasible_actions(s2, e, p))
        CHECK(reward(s2, e, a, p) == Catch::Approx(f(transition(s2, e, a, p))).margin(1e-12));
  }
}

TEST_CASE("cost is one exactly on blocked voice arrivals", "[model]") {
  const ModelParams p = tiny_params(3, 2);
  const StateSpace space(p);
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s = space.state(idx);
    for (EventKind e : kAllEvents)
      for (ActionKind a : feasible_actions(s, e, p)) {
        const double expected =
            (e == EventKind::VoiceArrival && a == ActionKind::Block) ? 1.0 : 0.0;
        CHECK(cost(s, e, a) == expected);
      }
  }
}
