#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hetnet {

/**
 * 802.11 medium parameters for the saturation-throughput model (basic access,
 * full-buffer stations). Times are in microseconds, rates in Mbps (= bits/us).
 *
 * ack_and_phy_overhead_us is a documented composite: MAC+PHY framing of the
 * data frame plus the complete ACK sequence (ACK PHY preamble and bits). The
 * default 48 us corresponds to ERP-OFDM framing with a 24 Mbps ACK.
 */
struct WifiParams {
  double channel_bit_rate_mbps = 54.0;
  double payload_bits = 12000.0;  // 1500-byte packet payload
  double udp_header_bits = 224.0;
  double slot_us = 20.0;
  double sifs_us = 10.0;
  double difs_us = 50.0;
  int cw_min = 15;   // initial contention window (backoff drawn from [0, cw])
  int cw_max = 1023; // doubling stops here
  double ack_and_phy_overhead_us = 48.0;

  void validate() const {
    if (channel_bit_rate_mbps <= 0 || payload_bits <= 0 || udp_header_bits < 0 ||
        slot_us <= 0 || sifs_us <= 0 || difs_us <= 0 || ack_and_phy_overhead_us <= 0)
      throw std::invalid_argument("WifiParams: all timings and rates must be positive");
    if (cw_min < 1 || cw_max < cw_min)
      throw std::invalid_argument("WifiParams: need 1 <= cw_min <= cw_max");
    const double ratio = double(cw_max + 1) / double(cw_min + 1);
    const double stages = std::log2(ratio);
    if (std::abs(stages - std::round(stages)) > 1e-9)
      throw std::invalid_argument("WifiParams: (cw_max+1)/(cw_min+1) must be a power of two");
  }

  int backoff_stages() const {
    return int(std::lround(std::log2(double(cw_max + 1) / double(cw_min + 1))));
  }
};

/**
 * Per-user WiFi throughput curve R_WD(k) for k = 1..k_max, with totals
 * k*R_WD(k) and the increments
 *
 *   Rdot(k) = (k+1) R_WD(k+1) - k R_WD(k),   k = 1..k_max-1,
 *
 * i.e. the gain in total WiFi throughput when the user count grows from k to
 * k+1. per_user must be strictly decreasing in k.
 */
struct ThroughputCurve {
  std::vector<double> per_user;   // per_user[k-1] = R_WD(k)
  std::vector<double> increment;  // increment[k-1] = Rdot(k), size k_max-1

  int k_max() const { return int(per_user.size()); }

  double per_user_mbps(int k) const {
    if (k < 1 || k > k_max())
      throw std::invalid_argument("ThroughputCurve: k=" + std::to_string(k) + " outside 1.." +
                                  std::to_string(k_max()));
    return per_user[size_t(k - 1)];
  }

  double total_mbps(int k) const { return k == 0 ? 0.0 : k * per_user_mbps(k); }

  double increment_mbps(int k) const {
    if (k < 1 || k >= k_max())
      throw std::invalid_argument("ThroughputCurve: increment undefined at k=" + std::to_string(k));
    return increment[size_t(k - 1)];
  }
};

namespace detail {

inline ThroughputCurve finish_curve(std::vector<double> per_user) {
  ThroughputCurve c;
  c.per_user = std::move(per_user);
  const int n = c.k_max();
  c.increment.resize(n > 0 ? size_t(n - 1) : 0);
  for (int k = 1; k < n; ++k)
    c.increment[size_t(k - 1)] = (k + 1) * c.per_user[size_t(k)] - k * c.per_user[size_t(k - 1)];
  for (int k = 1; k < n; ++k)
    if (!(c.per_user[size_t(k)] < c.per_user[size_t(k - 1)]))
      throw std::invalid_argument("throughput curve: per-user value not strictly decreasing at k=" +
                                  std::to_string(k + 1));
  return c;
}

// Bianchi-style attempt probability for conditional collision probability p.
inline double attempt_probability(double p, int w0, int m) {
  const double num = 2.0 * (1.0 - 2.0 * p);
  const double den = (1.0 - 2.0 * p) * (w0 + 1) + p * w0 * (1.0 - std::pow(2.0 * p, m));
  return num / den;
}

}  // namespace detail

/**
 * Saturation throughput of k contending stations via the standard fixed point
 * between per-station attempt probability tau and conditional collision
 * probability p = 1-(1-tau)^(k-1). The fixed point is solved by bisection on
 * p (the residual map is strictly decreasing) to residual <= 1e-10.
 */
inline ThroughputCurve bianchi_curve(const WifiParams& wp, int k_max) {
  wp.validate();
  if (k_max < 1) throw std::invalid_argument("bianchi_curve: k_max must be >= 1");
  const int w0 = wp.cw_min + 1;
  const int m = wp.backoff_stages();
  const double frame_us = (wp.payload_bits + wp.udp_header_bits) / wp.channel_bit_rate_mbps;
  const double t_success = frame_us + wp.sifs_us + wp.ack_and_phy_overhead_us + wp.difs_us;
  const double t_collision = frame_us + wp.difs_us;

  std::vector<double> per_user(static_cast<size_t>(k_max));
  for (int n = 1; n <= k_max; ++n) {
    double p = 0.0;
    if (n > 1) {
      double lo = 0.0, hi = 1.0;
      double residual = 1.0;
      for (int it = 0; it < 200 && residual > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double tau = detail::attempt_probability(mid, w0, m);
        const double g = 1.0 - std::pow(1.0 - tau, n - 1) - mid;
        (g > 0.0 ? lo : hi) = mid;
        residual = hi - lo;
      }
      if (residual > 1e-10)
        throw std::runtime_error("bianchi_curve: fixed point did not converge for k=" +
                                 std::to_string(n));
      p = 0.5 * (lo + hi);
    }
    const double tau = detail::attempt_probability(p, w0, m);
    const double p_tr = 1.0 - std::pow(1.0 - tau, n);
    const double p_succ = n * tau * std::pow(1.0 - tau, n - 1);
    const double slot_mean = (1.0 - p_tr) * wp.slot_us + p_succ * t_success +
                             (p_tr - p_succ) * t_collision;
    per_user[size_t(n - 1)] = p_succ * wp.payload_bits / slot_mean / n;
  }
  return detail::finish_curve(std::move(per_user));
}

/** Curve from explicit (k, Mbps) pairs; k must be contiguous from 1. */
inline ThroughputCurve table_curve(const std::vector<std::pair<int, double>>& values) {
  if (values.empty()) throw std::invalid_argument("table_curve: empty value list");
  std::vector<double> per_user;
  per_user.reserve(values.size());
  int expect = 1;
  for (const auto& [k, mbps] : values) {
    if (k != expect)
      throw std::invalid_argument("table_curve: k values must be contiguous from 1, got k=" +
                                  std::to_string(k));
    if (mbps <= 0)
      throw std::invalid_argument("table_curve: non-positive throughput at k=" + std::to_string(k));
    per_user.push_back(mbps);
    ++expect;
  }
  return detail::finish_curve(std::move(per_user));
}

/**
 * Largest user count whose per-user throughput still meets min_per_user:
 * W = max{k : R_WD(k) >= min_per_user}. The curve must actually cross the
 * threshold inside its domain, otherwise W would be ambiguous.
 */
inline int compute_W(const ThroughputCurve& curve, double min_per_user) {
  if (min_per_user <= 0) throw std::invalid_argument("compute_W: threshold must be positive");
  if (curve.per_user_mbps(1) < min_per_user)
    throw std::invalid_argument("compute_W: per-user throughput below threshold already at k=1");
  if (curve.per_user_mbps(curve.k_max()) >= min_per_user)
    throw std::invalid_argument(
        "compute_W: curve never drops below the threshold; extend k_max");
  int w = 1;
  while (curve.per_user_mbps(w + 1) >= min_per_user) ++w;
  return w;
}

struct KthResult {
  int k_th = 1;
  // True when R_LD >= Rdot(k) holds exactly for k >= k_th and fails for k < k_th
  // over the whole curve domain.
  bool assumption_holds = true;
};

/**
 * Smallest WiFi population at which one more data user is worth more in LTE
 * than in WiFi: k_th = min{k >= 1 : R_LD >= Rdot(k)}. If no increment in the
 * curve domain falls below R_LD, k_th = k_max (all of WiFi is "good").
 * assumption_holds reports whether the threshold splits the increments
 * two-sidedly, i.e. no k >= k_th has Rdot(k) > R_LD.
 */
inline KthResult compute_k_th(const ThroughputCurve& curve, double r_ld_mbps) {
  if (r_ld_mbps <= 0) throw std::invalid_argument("compute_k_th: R_LD must be positive");
  KthResult res;
  res.k_th = curve.k_max();
  for (int k = 1; k < curve.k_max(); ++k) {
    if (r_ld_mbps >= curve.increment_mbps(k)) {
      res.k_th = k;
      break;
    }
  }
  for (int k = res.k_th; k < curve.k_max(); ++k)
    if (curve.increment_mbps(k) > r_ld_mbps) res.assumption_holds = false;
  return res;
}

}  // namespace hetnet
