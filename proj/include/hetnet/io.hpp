#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/model.hpp"
#include "hetnet/policy.hpp"
#include "hetnet/solver.hpp"
#include "hetnet/wifi.hpp"

namespace hetnet {

/** Shortest round-trip decimal form; keeps CSV output byte-reproducible. */
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  double back = 0;
  std::sscanf(buf, "%lf", &back);
  if (back == x) {
    // try shorter forms first
    for (int prec = 1; prec <= 16; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, x);
      std::sscanf(shorter, "%lf", &back);
      if (back == x) return shorter;
    }
  }
  return buf;
}

/** FNV-1a 64-bit of a canonical string; used as the provenance hash. */
inline std::string fnv1a_hex(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

inline void write_curve_csv(std::ostream& out, const ThroughputCurve& curve) {
  out << "k,per_user_mbps,total_mbps,increment_mbps\n";
  for (int k = 1; k <= curve.k_max(); ++k) {
    out << k << ',' << format_double(curve.per_user_mbps(k)) << ','
        << format_double(curve.total_mbps(k)) << ',';
    if (k < curve.k_max()) out << format_double(curve.increment_mbps(k));
    out << '\n';
  }
}

inline void write_policy_csv(std::ostream& out, const Policy& policy, const StateSpace& space,
                             const ModelParams& p) {
  out << "i,j,k,event,action\n";
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s = space.state(idx);
    for (EventKind e : kAllEvents) {
      if (!decision_pair(s, e, p)) continue;
      out << s.i << ',' << s.j << ',' << s.k << ',' << event_name(e) << ','
          << action_name(policy.at(idx, e)) << '\n';
    }
  }
}

inline void write_value_csv(std::ostream& out, const ValueFunction& vf, const StateSpace& space) {
  out << "i,j,k,v\n";
  for (int idx = 0; idx < space.size(); ++idx) {
    const State& s = space.state(idx);
    out << s.i << ',' << s.j << ',' << s.k << ',' << format_double(vf.v[size_t(idx)]) << '\n';
  }
}

namespace detail {

inline EventKind event_from_name(const std::string& name) {
  for (EventKind e : kAllEvents)
    if (name == event_name(e)) return e;
  throw std::invalid_argument("unknown event name: " + name);
}

inline ActionKind action_from_name(const std::string& name) {
  for (int a = 0; a < kNumActions; ++a)
    if (name == action_name(ActionKind(a))) return ActionKind(a);
  throw std::invalid_argument("unknown action name: " + name);
}

}  // namespace detail

/** Reads a policy CSV (i,j,k,event,action) produced by write_policy_csv. */
inline Policy read_policy_csv(std::istream& in, const StateSpace& space, const ModelParams& p) {
  Policy policy(space.size());
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("policy csv: empty input");
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    State s;
    try {
      std::getline(row, field, ',');
      s.i = std::stoi(field);
      std::getline(row, field, ',');
      s.j = std::stoi(field);
      std::getline(row, field, ',');
      s.k = std::stoi(field);
    } catch (const std::exception&) {
      throw std::invalid_argument("policy csv: bad state on line " + std::to_string(line_no));
    }
    std::string event_field, action_field;
    std::getline(row, event_field, ',');
    std::getline(row, action_field, ',');
    policy.set(space.index(s), detail::event_from_name(event_field),
               detail::action_from_name(action_field));
  }
  validate_policy(policy, space, p);
  return policy;
}

}  // namespace hetnet
