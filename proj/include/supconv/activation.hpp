#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "supconv/series.hpp"

namespace supconv {

inline constexpr int kSmoothnessInf = 1000000;

enum class ShapeClass { s_shaped, relu_shaped, piecewise_linear };
enum class DecayTarget { sigma, sigma_over_x };

// Point where the activation is not C^inf; jets above max_jet_order are
// refused there.
struct Kink {
  double x;
  int max_jet_order;
};

struct KinkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Activation {
 public:
  std::string name;
  ShapeClass shape_class = ShapeClass::s_shaped;
  int smoothness_order = kSmoothnessInf;  // largest m with sigma in W^{m,inf}_loc
  // sigma_tilde = norm_beta * (sigma + norm_alpha) is the quasi-decay candidate
  double norm_alpha = 0.0;
  double norm_beta = 1.0;
  DecayTarget decay_target = DecayTarget::sigma;
  bool quasi_decay_expected = true;  // false for entries outside Condition 1 (ReLU^k, LeakyReLU)
  std::map<std::string, double> params;
  std::vector<Kink> kinks;

  double eval(double x) const;
  // Taylor coefficients of sigma at x up to `order`; refuses orders above the
  // kink's smoothness when x sits exactly on a kink.
  Series series(double x, int order) const;

  const Kink* kink_at(double x) const;
  bool is_smooth_everywhere() const { return kinks.empty(); }

  // sigma_tilde = beta (sigma + alpha)
  double eval_normalized(double x) const { return norm_beta * (eval(x) + norm_alpha); }
  Series series_normalized(double x, int order) const;

  // Affine image p*sigma + q with the normalization compensated so that the
  // quasi-decay candidate is unchanged. Used by the affine-invariance audit.
  Activation affine_variant(double p, double q) const;

 private:
  friend std::vector<Activation> activation_catalog();
  int kind_ = 0;
  double out_scale_ = 1.0, out_shift_ = 0.0;
};

// Every activation discussed by the catalog, with Table-1 classifications.
std::vector<Activation> activation_catalog();
const Activation& find_activation(const std::string& name);
bool activation_exists(const std::string& name);

// Series of the audited decay candidate g = sigma_tilde or sigma_tilde(x)/x.
// For the ratio target, x == 0 requires sigma_tilde(0) == 0 (the series is then
// the shifted-down normalized series).
Series decay_candidate_series(const Activation& a, double x, int order);

}  // namespace supconv
