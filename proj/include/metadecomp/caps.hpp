#pragma once

#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <string>

#include "metadecomp/error.hpp"

namespace metadecomp {

/// Size limits for the exponential reference routines.
///
/// Defaults can be overridden through the METADECOMP_CAPS environment
/// variable, a comma-separated list such as "global_dp=16,rows=20000".
struct Caps {
  int oracle_join_trees = 8;      // relations, brute-force join-tree oracle
  int oracle_plans = 6;           // relations, exhaustive plan-space enumeration
  int global_dp = 14;             // relations, connected-subset DP
  int true_cardinalities = 10;    // relations, per-subset execution
  std::int64_t rows = 10000;      // rows per relation in a micro database
  int width_cover = 4;            // largest cover size searched by width()
  int exact_fanout = 12;          // satellites, exact local DP
  std::int64_t rebranch_states = 2'000'000;  // DP states for the re-branching optimizer

  static Caps defaults() { return Caps{}; }

  /// Applies "key=value" pairs; unknown keys raise invalid-argument.
  void apply(const std::string& pairs) {
    std::stringstream ss(pairs);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos) fail(ErrorKind::kInvalidArgument, "malformed cap '" + item + "'");
      std::string key = item.substr(0, eq);
      std::int64_t value = 0;
      try {
        value = std::stoll(item.substr(eq + 1));
      } catch (const std::exception&) {
        fail(ErrorKind::kInvalidArgument, "cap '" + key + "' needs an integer value");
      }
      if (key == "oracle_join_trees") oracle_join_trees = static_cast<int>(value);
      else if (key == "oracle_plans") oracle_plans = static_cast<int>(value);
      else if (key == "global_dp") global_dp = static_cast<int>(value);
      else if (key == "true_cards") true_cardinalities = static_cast<int>(value);
      else if (key == "rows") rows = value;
      else if (key == "width_cover") width_cover = static_cast<int>(value);
      else if (key == "exact_fanout") exact_fanout = static_cast<int>(value);
      else if (key == "rebranch_states") rebranch_states = value;
      else fail(ErrorKind::kInvalidArgument, "unknown cap '" + key + "'");
    }
  }

  static Caps from_env() {
    Caps c;
    if (const char* env = std::getenv("METADECOMP_CAPS")) c.apply(env);
    return c;
  }
};

namespace detail {
inline Caps& caps_storage() {
  static Caps caps = Caps::from_env();
  return caps;
}
}  // namespace detail

/// Process-wide caps, initialised from METADECOMP_CAPS on first use.
inline const Caps& global_caps() { return detail::caps_storage(); }

inline void set_global_caps(const Caps& caps) { detail::caps_storage() = caps; }

inline void require_cap(const char* what, std::int64_t value, std::int64_t cap) {
  if (value > cap)
    fail(ErrorKind::kCapExceeded, std::string(what) + " is " + std::to_string(value) +
                                      ", above the cap of " + std::to_string(cap));
}

}  // namespace metadecomp
