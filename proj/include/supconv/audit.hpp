#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "supconv/activation.hpp"

namespace supconv {

// Numerical audit of the two admissibility conditions: global quasi-decay of
// the normalized candidate towards the Heaviside step, and local nonlinearity
// (a smooth point with nonvanishing second derivative).
struct ConditionReport {
  std::string condition;  // "quasi_decay" | "nonlinearity"
  std::string activation;
  bool passed = false;
  int order_checked = 0;

  // nonlinearity witness
  double witness_a = 0.0;
  double second_derivative = 0.0;

  // per-derivative-order tail fit; exponent is the least-squares slope of
  // log e_k vs log|x|, one fit per tail side
  struct TailFit {
    int k = 0;
    double exponent_pos = 0.0, exponent_neg = 0.0;
    bool below_floor_pos = false, below_floor_neg = false;  // tail agrees with H to fp precision
    double implied_C = 0.0;                                 // sup of e_k(x) |x|^{k+1} on the tails
    double origin_sup = 0.0;                                // sup of |g^{(k)}| near the origin
    bool pass = false;
  };
  std::vector<TailFit> fits;
  std::string grid_spec;

  nlohmann::json to_json() const;
};

struct AuditOptions {
  double tail_lo = 4.0, tail_hi = 40.0;
  int tail_points_per_side = 64;
  double origin_lo = -4.0, origin_hi = 4.0;
  int origin_points = 257;
  double exponent_slack = 0.25;
  double floor = 1e-13;  // tail errors below this count as agreement to fp precision
};

ConditionReport check_condition2(const Activation& a, double search_lo, double search_hi);
ConditionReport check_condition1(const Activation& a, int m, const AuditOptions& opt = {});

// Condition-2 witness used by the square construction; throws if none exists.
double condition2_witness(const Activation& a);

}  // namespace supconv
