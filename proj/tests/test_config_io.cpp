#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "hetnet/config.hpp"
#include "hetnet/io.hpp"
#include "hetnet/model.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/simulate.hpp"

using namespace hetnet;

TEST_CASE("reference configuration resolves to the documented defaults", "[config]") {
  const ResolvedModel model = resolve_model_config(reference_config());
  CHECK(model.params.C == 10);
  CHECK(model.params.W == 7);
  CHECK(model.k_th == 1);
  CHECK(model.assumption1_valid);
  CHECK(model.params.r_lv_mbps == Catch::Approx(0.02));
  CHECK(model.echo.at("W").get<int>() == 7);
  CHECK(model.echo.at("wifi").at("cw_min").get<int>() == 15);
  CHECK(model.echo.at("wifi").at("cw_max").get<int>() == 1023);
}

TEST_CASE("config validation failures name the problem", "[config]") {
  json cfg = reference_config();
  cfg["C"] = 0;
  CHECK_THROWS_AS(resolve_model_config(cfg), ConfigError);

  cfg = reference_config();
  cfg.erase("mu_v");
  CHECK_THROWS_AS(resolve_model_config(cfg), ConfigError);

  cfg = reference_config();
  cfg["W_mode"] = "sideways";
  CHECK_THROWS_AS(resolve_model_config(cfg), ConfigError);

  cfg = reference_config();
  cfg["min_wifi_throughput_mbps"] = 100.0;  // above the whole curve
  CHECK_THROWS_AS(resolve_model_config(cfg), ConfigError);

  cfg = reference_config();
  cfg["wifi"] = json{{"model", "table"}, {"table", json::array({json::array({1, 5.0}),
                                                                json::array({2, 6.0})})}};
  cfg["W_mode"] = "fixed";
  cfg["W"] = 2;
  CHECK_THROWS_AS(resolve_model_config(cfg), ConfigError);  // non-monotone table
}

TEST_CASE("fixed W and table curves resolve", "[config]") {
  json cfg = reference_config();
  cfg["W_mode"] = "fixed";
  cfg["W"] = 3;
  cfg["wifi"] = json{{"model", "table"},
                     {"table", json::array({json::array({1, 22.0}), json::array({2, 12.0}),
                                            json::array({3, 7.0})})}};
  const ResolvedModel model = resolve_model_config(cfg);
  CHECK(model.params.W == 3);
  CHECK(model.params.wifi_curve.per_user_mbps(2) == Catch::Approx(12.0));
}

TEST_CASE("double formatting round-trips exactly", "[io]") {
  RngStream rng(5, 0, 0);
  for (int n = 0; n < 2000; ++n) {
    double x = (rng.next_double() - 0.5) * std::pow(10.0, int(rng.next_u32() % 37) - 18);
    if (n % 7 == 0) x = -x;
    const std::string text = format_double(x);
    double back = 0;
    std::sscanf(text.c_str(), "%lf", &back);
    CHECK(back == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("policy csv round-trips", "[io]") {
  ModelParams p;
  p.lambda_v = 0.5;
  p.lambda_d = 0.3;
  p.mu_v = 0.25;
  p.mu_d = 0.4;
  p.C = 2;
  p.W = 2;
  p.r_lv_mbps = 0.02;
  p.r_ld_mbps = 5.0;
  p.wifi_curve = table_curve({{1, 20.0}, {2, 10.0}});
  const StateSpace space(p);
  const Policy policy = policy_on_the_spot(space, p);

  std::ostringstream out;
  write_policy_csv(out, policy, space, p);
  std::istringstream in(out.str());
  const Policy back = read_policy_csv(in, space, p);
  CHECK(back == policy);
}

TEST_CASE("config hash is stable and input-sensitive", "[io]") {
  const std::string a = fnv1a_hex("{\"x\":1}");
  CHECK(a == fnv1a_hex("{\"x\":1}"));
  CHECK(a != fnv1a_hex("{\"x\":2}"));
  CHECK(a.size() == 16);
}
