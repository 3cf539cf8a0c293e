#pragma once

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/model.hpp"
#include "hetnet/simulate.hpp"
#include "hetnet/solver.hpp"
#include "hetnet/wifi.hpp"

namespace hetnet {

using json = nlohmann::json;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/**
 * A model configuration with the resolved values echoed back (every default
 * that was filled in appears in `echo`, so result files carry the complete
 * parameter set that produced them).
 */
struct ResolvedModel {
  ModelParams params;
  bool assumption1_valid = true;
  int k_th = 1;
  json echo;
};

namespace detail {

template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("config: missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for '" + key + "': " + e.what());
  }
}

}  // namespace detail

inline WifiParams wifi_params_from_json(const json& w) {
  WifiParams wp;
  wp.channel_bit_rate_mbps = detail::get_or(w, "channel_bit_rate_mbps", wp.channel_bit_rate_mbps);
  wp.payload_bits = detail::get_or(w, "payload_bits", wp.payload_bits);
  wp.udp_header_bits = detail::get_or(w, "udp_header_bits", wp.udp_header_bits);
  wp.slot_us = detail::get_or(w, "slot_us", wp.slot_us);
  wp.sifs_us = detail::get_or(w, "sifs_us", wp.sifs_us);
  wp.difs_us = detail::get_or(w, "difs_us", wp.difs_us);
  wp.cw_min = detail::get_or(w, "cw_min", wp.cw_min);
  wp.cw_max = detail::get_or(w, "cw_max", wp.cw_max);
  wp.ack_and_phy_overhead_us =
      detail::get_or(w, "ack_and_phy_overhead_us", wp.ack_and_phy_overhead_us);
  return wp;
}

inline json wifi_params_to_json(const WifiParams& wp) {
  return json{{"model", "bianchi"},
              {"channel_bit_rate_mbps", wp.channel_bit_rate_mbps},
              {"payload_bits", wp.payload_bits},
              {"udp_header_bits", wp.udp_header_bits},
              {"slot_us", wp.slot_us},
              {"sifs_us", wp.sifs_us},
              {"difs_us", wp.difs_us},
              {"cw_min", wp.cw_min},
              {"cw_max", wp.cw_max},
              {"ack_and_phy_overhead_us", wp.ack_and_phy_overhead_us}};
}

/**
 * Model configuration schema (see README for the full description):
 *
 *   lambda_v, lambda_d, mu_v, mu_d   rates (1/time unit)
 *   C                                LTE common resource pool size
 *   R_LV_mbps, R_LD_mbps             LTE per-user bit rates
 *   W_mode                           "from_curve" | "fixed"
 *   min_wifi_throughput_mbps        (from_curve) per-user acceptance floor
 *   W                               (fixed) explicit WiFi cap
 *   wifi.model                       "bianchi" | "table"
 *   wifi.*                           bianchi timings or `table: [[k, mbps]..]`
 *   wifi.k_max                       bianchi curve extent (default 32)
 */
inline ResolvedModel resolve_model_config(const json& cfg) {
  ResolvedModel out;
  ModelParams& p = out.params;
  p.lambda_v = detail::require<double>(cfg, "lambda_v");
  p.lambda_d = detail::require<double>(cfg, "lambda_d");
  p.mu_v = detail::require<double>(cfg, "mu_v");
  p.mu_d = detail::require<double>(cfg, "mu_d");
  p.C = detail::require<int>(cfg, "C");
  p.r_lv_mbps = detail::require<double>(cfg, "R_LV_mbps");
  p.r_ld_mbps = detail::require<double>(cfg, "R_LD_mbps");

  if (!cfg.contains("wifi")) throw ConfigError("config: missing 'wifi' object");
  const json& w = cfg.at("wifi");
  const std::string model = detail::get_or<std::string>(w, "model", "bianchi");
  const int k_max = detail::get_or(w, "k_max", 32);
  json wifi_echo;
  if (model == "bianchi") {
    const WifiParams wp = wifi_params_from_json(w);
    try {
      p.wifi_curve = bianchi_curve(wp, k_max);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    wifi_echo = wifi_params_to_json(wp);
    wifi_echo["k_max"] = k_max;
  } else if (model == "table") {
    std::vector<std::pair<int, double>> rows;
    for (const auto& row : detail::require<json>(w, "table")) {
      if (!row.is_array() || row.size() != 2)
        throw ConfigError("config: wifi.table rows must be [k, mbps] pairs");
      rows.emplace_back(row[0].get<int>(), row[1].get<double>());
    }
    try {
      p.wifi_curve = table_curve(rows);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    wifi_echo = json{{"model", "table"}, {"table", w.at("table")}};
  } else {
    throw ConfigError("config: wifi.model must be 'bianchi' or 'table'");
  }

  const std::string w_mode = detail::get_or<std::string>(cfg, "W_mode", "from_curve");
  double min_thr = 0;
  if (w_mode == "from_curve") {
    min_thr = detail::require<double>(cfg, "min_wifi_throughput_mbps");
    try {
      p.W = compute_W(p.wifi_curve, min_thr);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  } else if (w_mode == "fixed") {
    p.W = detail::require<int>(cfg, "W");
  } else {
    throw ConfigError("config: W_mode must be 'from_curve' or 'fixed'");
  }

  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  const KthResult kth = compute_k_th(p.wifi_curve, p.r_ld_mbps);
  out.k_th = kth.k_th;
  out.assumption1_valid = kth.assumption_holds;

  out.echo = json{{"lambda_v", p.lambda_v}, {"lambda_d", p.lambda_d},
                  {"mu_v", p.mu_v},         {"mu_d", p.mu_d},
                  {"C", p.C},               {"R_LV_mbps", p.r_lv_mbps},
                  {"R_LD_mbps", p.r_ld_mbps},
                  {"W_mode", w_mode},       {"W", p.W},
                  {"k_th", out.k_th},       {"assumption1_valid", out.assumption1_valid},
                  {"wifi", wifi_echo}};
  if (w_mode == "from_curve") out.echo["min_wifi_throughput_mbps"] = min_thr;
  return out;
}

inline SolverConfig solver_config_from_json(const json& cfg) {
  SolverConfig sc;
  if (!cfg.is_object()) return sc;
  sc.via_tolerance = detail::get_or(cfg, "via_tolerance", sc.via_tolerance);
  sc.via_max_iters = detail::get_or(cfg, "via_max_iters", sc.via_max_iters);
  sc.beta_init = detail::get_or(cfg, "beta_init", sc.beta_init);
  sc.beta_tolerance = detail::get_or(cfg, "beta_tolerance", sc.beta_tolerance);
  sc.beta_max_iters = detail::get_or(cfg, "beta_max_iters", sc.beta_max_iters);
  sc.epsilon = detail::get_or(cfg, "epsilon", sc.epsilon);
  const std::string tie = detail::get_or<std::string>(cfg, "tie_break", "lowest");
  if (tie == "lowest")
    sc.tie_break = TieBreak::LowestIndex;
  else if (tie == "highest")
    sc.tie_break = TieBreak::HighestIndex;
  else
    throw ConfigError("config: tie_break must be 'lowest' or 'highest'");
  sc.validate();
  return sc;
}

inline SimConfig sim_config_from_json(const json& cfg) {
  SimConfig sim;
  if (!cfg.is_object()) return sim;
  sim.horizon_events = detail::get_or(cfg, "horizon_events", sim.horizon_events);
  sim.warmup_events = detail::get_or(cfg, "warmup_events", sim.warmup_events);
  sim.replications = detail::get_or(cfg, "replications", sim.replications);
  sim.base_seed = detail::get_or(cfg, "base_seed", sim.base_seed);
  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return sim;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

/** The default operating point used throughout the experiments. */
inline json reference_config() {
  return json{{"lambda_v", 1.0 / 6.0},
              {"lambda_d", 1.0 / 20.0},
              {"mu_v", 1.0 / 60.0},
              {"mu_d", 1.0 / 10.0},
              {"C", 10},
              {"R_LV_mbps", 0.02},
              {"R_LD_mbps", 5.0},
              {"W_mode", "from_curve"},
              {"min_wifi_throughput_mbps", 3.5},
              {"wifi", json{{"model", "bianchi"}}}};
}

}  // namespace hetnet
