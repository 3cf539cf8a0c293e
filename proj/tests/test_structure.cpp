#include <catch2/catch_amalgamated.hpp>

#include "hetnet/cmdp.hpp"
#include "hetnet/evaluate.hpp"
#include "hetnet/model.hpp"
#include "hetnet/solver.hpp"
#include "hetnet/structure.hpp"
#include "hetnet/wifi.hpp"

using namespace hetnet;

namespace {

// Assumption 1 holds with k_th = 2: increments (6, 1) against R_LD = 5.
ModelParams structured_params() {
  ModelParams p;
  p.lambda_v = 0.4;
  p.lambda_d = 0.25;
  p.mu_v = 0.12;
  p.mu_d = 0.3;
  p.C = 4;
  p.W = 3;
  p.r_lv_mbps = 0.02;
  p.r_ld_mbps = 5.0;
  p.wifi_curve = table_curve({{1, 20.0}, {2, 13.0}, {3, 9.0}});
  return p;
}

}  // namespace

TEST_CASE("never-blocking rows use the sentinel threshold", "[structure]") {
  const ModelParams p = structured_params();
  const StateSpace space(p);
  const int k_th = compute_k_th(p.wifi_curve, p.r_ld_mbps).k_th;
  const Policy policy = maximal_acceptance_policy(space, p, k_th);
  const ThresholdTables t = extract_thresholds(policy, k_th, space, p);
  for (int j = 0; j < p.C; ++j)
    for (int k = 0; k <= p.W; ++k) CHECK(t.va_lc[size_t(j)][size_t(k)] == p.C - j);
}

TEST_CASE("block-everywhere policies extract zero thresholds", "[structure]") {
  const ModelParams p = structured_params();
  const StateSpace space(p);
  const int k_th = compute_k_th(p.wifi_curve, p.r_ld_mbps).k_th;
  Policy policy = maximal_acceptance_policy(space, p, k_th);
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s = space.state(idx);
    if (decision_pair(s, EventKind::VoiceArrival, p) &&
        is_feasible(s, EventKind::VoiceArrival, ActionKind::Block, p))
      policy.set(idx, EventKind::VoiceArrival, ActionKind::Block);
  }
  const ThresholdTables t = extract_thresholds(policy, k_th, space, p);
  for (int j = 0; j < p.C; ++j)
    for (int k = 0; k <= p.W; ++k) {
      // every state of the row blocks except (0,0,0) where blocking is
      // infeasible, pushing the row threshold to 1
      const int expected = (j == 0 && k == 0) ? 1 : 0;
      CHECK(t.va_lc[size_t(j)][size_t(k)] == expected);
    }
  for (int k = 0; k <= p.W; ++k) CHECK(t.va_c[0][size_t(k)] == 0);
}

TEST_CASE("non-threshold policies are rejected with the offending row", "[structure]") {
  const ModelParams p = structured_params();
  const StateSpace space(p);
  const int k_th = compute_k_th(p.wifi_curve, p.r_ld_mbps).k_th;
  Policy policy = maximal_acceptance_policy(space, p, k_th);
  // block at i=1 but accept at i=2 in the (j=0,k=0) row: not monotone
  policy.set(space.index({1, 0, 0}), EventKind::VoiceArrival, ActionKind::Block);
  try {
    extract_thresholds(policy, k_th, space, p);
    FAIL("expected ThresholdExtractionError");
  } catch (const ThresholdExtractionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(1,0,0)") != std::string::npos);
    CHECK(msg.find("(2,0,0)") != std::string::npos);
  }
}

TEST_CASE("solved policy extracts and reconstructs exactly", "[structure]") {
  const ModelParams p = structured_params();
  const StateSpace space(p);
  const KthResult kth = compute_k_th(p.wifi_curve, p.r_ld_mbps);
  REQUIRE(kth.k_th == 2);
  REQUIRE(kth.assumption_holds);

  const SolveResult solved = solve_unconstrained(p);
  const ThresholdTables t = extract_thresholds(solved.policy, kth.k_th, space, p);
  const Policy replay = policy_from_thresholds(t, space, p);
  for (int idx = 0; idx < space.size(); ++idx)
    for (EventKind e : kAllEvents)
      if (decision_pair(space.state(idx), e, p)) CHECK(replay.at(idx, e) == solved.policy.at(idx, e));
}

TEST_CASE("data and voice lemma checks pass on the solved structured instance", "[structure]") {
  const ModelParams p = structured_params();
  const StateSpace space(p);
  const KthResult kth = compute_k_th(p.wifi_curve, p.r_ld_mbps);
  SolverConfig cfg;
  cfg.via_tolerance = 1e-11;
  const SolveResult solved = value_iteration(uniformize(p), 0.0, cfg);

  const LemmaCheck data = verify_data_lemmas(solved.policy, kth.k_th, space, p);
  INFO("data violations: " << data.violations.size());
  CHECK(data.pass());
  CHECK(data.pairs_checked > 0);

  const LemmaCheck voice = verify_voice_lemmas(solved.policy, kth.k_th, space, p);
  INFO("voice violations: " << voice.violations.size());
  CHECK(voice.pass());
  CHECK(voice.pairs_checked > 0);
}

TEST_CASE("voice lemma check flags a planted violation", "[structure]") {
  const ModelParams p = structured_params();
  const StateSpace space(p);
  const int k_th = compute_k_th(p.wifi_curve, p.r_ld_mbps).k_th;
  Policy policy = maximal_acceptance_policy(space, p, k_th);
  // accepting with the wrong action type: plain accept below k_th with an
  // offload available
  const State s{1, 1, 0};
  REQUIRE(is_feasible(s, EventKind::VoiceArrival, ActionKind::AcceptVoiceOffload, p));
  policy.set(space.index(s), EventKind::VoiceArrival, ActionKind::AcceptLte);
  const LemmaCheck voice = verify_voice_lemmas(policy, k_th, space, p);
  CHECK_FALSE(voice.pass());
}

TEST_CASE("value structure holds at the structured instance", "[structure]") {
  const ModelParams p = structured_params();
  const StateSpace space(p);
  const KthResult kth = compute_k_th(p.wifi_curve, p.r_ld_mbps);
  SolverConfig cfg;
  cfg.via_tolerance = 1e-11;
  const SolveResult solved = value_iteration(uniformize(p), 0.0, cfg);
  const auto checks = verify_value_structure(solved.value, kth.k_th, space, p);
  REQUIRE(checks.size() == 5);
  for (const auto& c : checks) {
    INFO(c.name << " worst residual " << c.worst_residual << " tol " << c.tolerance);
    if (!c.informational) {
      CHECK(c.triples_checked > 0);
      CHECK(c.pass());
    }
  }
}

TEST_CASE("failed assumption downgrades lemma checks to informational", "[structure]") {
  const ModelParams p = structured_params();
  const StateSpace space(p);
  const SolveResult solved = solve_unconstrained(p);
  const StructureReport report = verify_structure(solved, 2, false, space, p);
  for (const auto& c : report.lemma_checks) CHECK(c.informational);
  CHECK_FALSE(report.assumption1_valid);
}

TEST_CASE("structure report aggregates all checks", "[structure]") {
  const ModelParams p = structured_params();
  const StateSpace space(p);
  const KthResult kth = compute_k_th(p.wifi_curve, p.r_ld_mbps);
  SolverConfig cfg;
  cfg.via_tolerance = 1e-11;
  const SolveResult solved = value_iteration(uniformize(p), 0.0, cfg);
  const StructureReport report =
      verify_structure(solved, kth.k_th, kth.assumption_holds, space, p);
  CHECK(report.thresholds_ok());
  CHECK(report.lemma_checks.size() == 2);
  CHECK(report.value_checks.size() == 5);
  CHECK_FALSE(report.hard_violations());
}
