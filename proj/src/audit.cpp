#include "supconv/audit.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

namespace supconv {

nlohmann::json ConditionReport::to_json() const {
  nlohmann::json j;
  j["condition"] = condition;
  j["activation"] = activation;
  j["passed"] = passed;
  j["order_checked"] = order_checked;
  j["grid_spec"] = grid_spec;
  if (condition == "nonlinearity") {
    j["witness_a"] = witness_a;
    j["second_derivative"] = second_derivative;
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : fits) {
      arr.push_back({{"k", f.k},
                     {"exponent_pos", f.exponent_pos},
                     {"exponent_neg", f.exponent_neg},
                     {"below_floor_pos", f.below_floor_pos},
                     {"below_floor_neg", f.below_floor_neg},
                     {"implied_C", f.implied_C},
                     {"origin_sup", f.origin_sup},
                     {"pass", f.pass}});
    }
    j["fits"] = arr;
  }
  return j;
}

ConditionReport check_condition2(const Activation& a, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("check_condition2: degenerate interval");
  ConditionReport rep;
  rep.condition = "nonlinearity";
  rep.activation = a.name;
  rep.order_checked = 2;
  {
    std::ostringstream os;
    os << "401 points on [" << lo << "," << hi << "], kink margin 0.05";
    rep.grid_spec = os.str();
  }

  const int n = 401;
  const double margin = 0.05;
  double best = 0.0, best_x = lo;
  for (int i = 0; i < n; ++i) {
    double x = lo + (hi - lo) * double(i) / double(n - 1);
    bool near_kink = false;
    for (const auto& k : a.kinks)
      if (std::abs(x - k.x) < margin) near_kink = true;
    if (near_kink) continue;
    double dd = a.series(x, 2).deriv(2);
    if (std::isfinite(dd) && std::abs(dd) > std::abs(best)) {
      best = dd;
      best_x = x;
    }
  }
  rep.witness_a = best_x;
  rep.second_derivative = best;
  rep.passed = std::abs(best) > 1e-8;
  return rep;
}

double condition2_witness(const Activation& a) {
  ConditionReport rep = check_condition2(a, -2.0, 2.0);
  if (!rep.passed) throw std::runtime_error(a.name + ": no Condition 2 witness found on [-2,2]");
  return rep.witness_a;
}

namespace {

// least-squares slope of log(e) vs log|x|
double fit_exponent(const std::vector<double>& xs, const std::vector<double>& es) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = int(xs.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(std::abs(xs[size_t(i)])), ly = std::log(es[size_t(i)]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ConditionReport check_condition1(const Activation& a, int m, const AuditOptions& opt) {
  if (m > a.smoothness_order)
    throw std::invalid_argument(a.name + ": condition-1 order exceeds smoothness order");
  if (!(opt.tail_lo > 0)) throw std::invalid_argument("check_condition1: tail range must exclude 0");

  ConditionReport rep;
  rep.condition = "quasi_decay";
  rep.activation = a.name;
  rep.order_checked = m;
  {
    std::ostringstream os;
    os << opt.tail_points_per_side << " log-spaced tail points per side on +-[" << opt.tail_lo << ","
       << opt.tail_hi << "], origin grid " << opt.origin_points << " on [" << opt.origin_lo << ","
       << opt.origin_hi << "]";
    rep.grid_spec = os.str();
  }

  std::vector<double> tail;
  for (int i = 0; i < opt.tail_points_per_side; ++i) {
    double t = double(i) / double(opt.tail_points_per_side - 1);
    tail.push_back(opt.tail_lo * std::pow(opt.tail_hi / opt.tail_lo, t));
  }

  bool all_pass = true;
  for (int k = 0; k <= m; ++k) {
    ConditionReport::TailFit fit;
    fit.k = k;

    auto err_at = [&](double x) {
      double g = decay_candidate_series(a, x, k).deriv(k);
      double h = (k == 0 && x > 0) ? 1.0 : 0.0;
      return std::abs(g - h);
    };

    bool k_pass = true;
    for (int side = 0; side < 2; ++side) {
      std::vector<double> xs, es;
      for (double t : tail) {
        double x = side == 0 ? t : -t;
        double e = err_at(x);
        fit.implied_C = std::max(fit.implied_C, e * std::pow(std::abs(x), k + 1));
        if (e > opt.floor) {
          xs.push_back(x);
          es.push_back(e);
        }
      }
      bool below = int(xs.size()) < 3;
      double expnt = 0.0;
      bool side_pass = below;
      if (!below) {
        expnt = fit_exponent(xs, es);
        side_pass = expnt <= -(double(k) + 1.0) + opt.exponent_slack;
      }
      if (side == 0) {
        fit.exponent_pos = expnt;
        fit.below_floor_pos = below;
      } else {
        fit.exponent_neg = expnt;
        fit.below_floor_neg = below;
      }
      k_pass = k_pass && side_pass;
    }
    fit.pass = k_pass;

    // global boundedness near the origin (the G branch of the bound)
    double sup = 0.0;
    for (int i = 0; i < opt.origin_points; ++i) {
      double x = opt.origin_lo +
                 (opt.origin_hi - opt.origin_lo) * (double(i) + 0.5) / double(opt.origin_points);
      bool skip = false;
      for (const auto& kk : a.kinks)
        if (std::abs(x - kk.x) < 1e-6) skip = true;
      if (skip) continue;
      double g = decay_candidate_series(a, x, k).deriv(k);
      sup = std::max(sup, std::abs(g));
    }
    fit.origin_sup = sup;
    if (!std::isfinite(sup)) fit.pass = false;
    all_pass = all_pass && fit.pass;
    rep.fits.push_back(fit);
  }
  rep.passed = all_pass;
  return rep;
}

}  // namespace supconv
