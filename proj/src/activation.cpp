#include "supconv/activation.hpp"

#include <cmath>

#include "supconv/multiindex.hpp"

namespace supconv {

namespace {

enum Kind {
  kSigmoid = 1,
  kTanh,
  kArctan,
  kDSiLU,
  kSRS,
  kSoftsign,
  kHardSigmoid,
  kHardTanh,
  kELU,
  kCELU,
  kSELU,
  kSoftplus,
  kSiLU,
  kMish,
  kGELU,
  kReLU,
  kLeakyReLU,
  kReLUPow,  // params["k"]
};

double param(const std::map<std::string, double>& p, const std::string& k, double dflt) {
  auto it = p.find(k);
  return it == p.end() ? dflt : it->second;
}

}  // namespace

double Activation::eval(double x) const {
  double v;
  switch (kind_) {
    case kSigmoid: v = stable_sigmoid(x); break;
    case kTanh: v = std::tanh(x); break;
    case kArctan: v = std::atan(x); break;
    case kDSiLU: {
      double s = stable_sigmoid(x);
      v = s + x * s * (1.0 - s);
      break;
    }
    case kSRS: {
      double a = param(params, "alpha", 3.0), b = param(params, "beta", 2.0);
      v = x / (x / a + std::exp(-x / b));
      break;
    }
    case kSoftsign: v = x / (1.0 + std::abs(x)); break;
    case kHardSigmoid: v = std::max(0.0, std::min(1.0, (x + 1.0) / 2.0)); break;
    case kHardTanh: v = std::max(-1.0, std::min(1.0, x)); break;
    case kELU: {
      double a = param(params, "alpha", 1.0);
      v = x >= 0 ? x : a * std::expm1(x);
      break;
    }
    case kCELU: {
      double b = param(params, "beta", 1.0);
      v = x >= 0 ? x : b * std::expm1(x / b);
      break;
    }
    case kSELU: {
      double a = param(params, "alpha", 1.6732632423543772);
      double l = param(params, "lambda", 1.0507009873554805);
      v = l * (x >= 0 ? x : a * std::expm1(x));
      break;
    }
    case kSoftplus: v = stable_softplus(x); break;
    case kSiLU: v = x * stable_sigmoid(x); break;
    case kMish: v = x * std::tanh(stable_softplus(x)); break;
    case kGELU: v = x * 0.5 * std::erfc(-x / std::sqrt(2.0)); break;
    case kReLU: v = std::max(0.0, x); break;
    case kLeakyReLU: {
      double s = param(params, "slope", 0.01);
      v = x >= 0 ? x : s * x;
      break;
    }
    case kReLUPow: {
      int k = int(param(params, "k", 2.0));
      v = x > 0 ? std::pow(x, k) : 0.0;
      break;
    }
    default: throw std::logic_error("Activation::eval: bad kind");
  }
  return out_scale_ * v + out_shift_;
}

const Kink* Activation::kink_at(double x) const {
  for (const auto& k : kinks)
    if (k.x == x) return &k;
  return nullptr;
}

Series Activation::series(double x, int order) const {
  if (const Kink* k = kink_at(x); k && order > k->max_jet_order)
    throw KinkError(name + ": derivative order " + std::to_string(order) +
                    " unavailable at non-smooth point x=" + std::to_string(x));
  Series s;
  switch (kind_) {
    case kSigmoid: s = series_sigmoid(x, order); break;
    case kTanh: s = series_tanh(x, order); break;
    case kArctan: s = series_atan(x, order); break;
    case kDSiLU: {
      // d/dx (x sigmoid) = sigmoid + x sigmoid'
      Series sg = series_sigmoid(x, order + 1);
      Series silu = series_identity(x, order + 1) * sg;
      s = Series(order);
      for (int k = 0; k <= order; ++k) s.c[size_t(k)] = double(k + 1) * silu.c[size_t(k + 1)];
      break;
    }
    case kSRS: {
      double a = param(params, "alpha", 3.0), b = param(params, "beta", 2.0);
      Series e(order);  // exp(-(x+t)/b)
      for (int k = 0; k <= order; ++k)
        e.c[size_t(k)] = std::exp(-x / b) * std::pow(-1.0 / b, k) / factorial(k);
      Series den = (1.0 / a) * series_identity(x, order) + e;
      s = series_div(series_identity(x, order), den);
      break;
    }
    case kSoftsign: {
      if (x == 0.0) {
        s = Series(order);
        if (order >= 1) s.c[1] = 1.0;
        break;
      }
      Series den(order);
      den.c[0] = 1.0 + std::abs(x);
      if (order >= 1) den.c[1] = x > 0 ? 1.0 : -1.0;
      s = series_div(series_identity(x, order), den);
      break;
    }
    case kHardSigmoid: {
      s = Series(order);
      s.c[0] = std::max(0.0, std::min(1.0, (x + 1.0) / 2.0));
      if (order >= 1 && x > -1.0 && x < 1.0) s.c[1] = 0.5;
      break;
    }
    case kHardTanh: {
      s = Series(order);
      s.c[0] = std::max(-1.0, std::min(1.0, x));
      if (order >= 1 && x > -1.0 && x < 1.0) s.c[1] = 1.0;
      break;
    }
    case kELU:
    case kCELU:
    case kSELU: {
      double a = 1.0, b = 1.0, l = 1.0;
      if (kind_ == kELU) a = param(params, "alpha", 1.0);
      if (kind_ == kCELU) b = param(params, "beta", 1.0);
      if (kind_ == kSELU) {
        a = param(params, "alpha", 1.6732632423543772);
        l = param(params, "lambda", 1.0507009873554805);
      }
      if (x > 0.0) {
        s = l * series_identity(x, order);
      } else if (x < 0.0) {
        Series e = series_exp(x / b, order);
        for (int k = 1; k <= order; ++k) e.c[size_t(k)] *= std::pow(1.0 / b, k);
        e.c[0] -= 1.0;
        s = (l * a * b) * e;
      } else {
        // at the kink, orders <= 1 only (guarded above): value 0, slope 1
        s = Series(order);
        if (order >= 1) s.c[1] = l;
      }
      break;
    }
    case kSoftplus: s = series_softplus(x, order); break;
    case kSiLU: s = series_identity(x, order) * series_sigmoid(x, order); break;
    case kMish: {
      Series sp = series_softplus(x, order);
      Series th = series_tanh(sp.c[0], order);
      s = series_identity(x, order) * series_compose(th, sp);
      break;
    }
    case kGELU: s = series_identity(x, order) * series_gauss_cdf(x, order); break;
    case kReLU: {
      s = Series(order);
      if (x > 0) {
        s.c[0] = x;
        if (order >= 1) s.c[1] = 1.0;
      }
      break;
    }
    case kLeakyReLU: {
      double sl = param(params, "slope", 0.01);
      s = Series(order);
      s.c[0] = x >= 0 ? x : sl * x;
      if (order >= 1 && x != 0.0) s.c[1] = x > 0 ? 1.0 : sl;
      break;
    }
    case kReLUPow: {
      int k = int(param(params, "k", 2.0));
      s = x > 0 ? series_pow_int(x, k, order) : Series(order);
      break;
    }
    default: throw std::logic_error("Activation::series: bad kind");
  }
  s *= out_scale_;
  s.c[0] += out_shift_;
  return s;
}

Series Activation::series_normalized(double x, int order) const {
  Series s = series(x, order);
  s *= norm_beta;
  s.c[0] += norm_beta * norm_alpha;
  return s;
}

Activation Activation::affine_variant(double p, double q) const {
  if (p == 0.0) throw std::invalid_argument("affine_variant: degenerate scale");
  Activation v = *this;
  v.name = name + "_affine";
  v.out_scale_ = out_scale_ * p;
  v.out_shift_ = out_shift_ * p + q;
  v.norm_beta = norm_beta / p;
  v.norm_alpha = p * norm_alpha - q;
  return v;
}

Series decay_candidate_series(const Activation& a, double x, int order) {
  if (a.decay_target == DecayTarget::sigma) return a.series_normalized(x, order);
  if (x == 0.0) {
    Series s = a.series_normalized(0.0, order + 1);
    if (std::abs(s.c[0]) > 1e-12)
      throw std::domain_error(a.name + ": sigma/x undefined at 0 (sigma_tilde(0) != 0)");
    Series r(order);
    for (int k = 0; k <= order; ++k) r.c[size_t(k)] = s.c[size_t(k + 1)];
    return r;
  }
  return series_div(a.series_normalized(x, order), series_identity(x, order));
}

std::vector<Activation> activation_catalog() {
  std::vector<Activation> cat;
  auto add = [&](std::string name, int kind, ShapeClass sc, int smooth, double alpha, double beta,
                 DecayTarget tgt, std::map<std::string, double> params = {},
                 std::vector<Kink> kinks = {}, bool decays = true) {
    Activation a;
    a.name = std::move(name);
    a.kind_ = kind;
    a.shape_class = sc;
    a.smoothness_order = smooth;
    a.norm_alpha = alpha;
    a.norm_beta = beta;
    a.decay_target = tgt;
    a.params = std::move(params);
    a.kinks = std::move(kinks);
    a.quasi_decay_expected = decays;
    cat.push_back(std::move(a));
  };

  const double half_pi = M_PI / 2.0;
  const double selu_l = 1.0507009873554805, selu_a = 1.6732632423543772;

  // smooth S-shaped
  add("sigmoid", kSigmoid, ShapeClass::s_shaped, kSmoothnessInf, 0.0, 1.0, DecayTarget::sigma);
  add("tanh", kTanh, ShapeClass::s_shaped, kSmoothnessInf, 1.0, 0.5, DecayTarget::sigma);
  add("arctan", kArctan, ShapeClass::s_shaped, kSmoothnessInf, half_pi, 1.0 / M_PI, DecayTarget::sigma);
  add("dsilu", kDSiLU, ShapeClass::s_shaped, kSmoothnessInf, 0.0, 1.0, DecayTarget::sigma);
  add("srs", kSRS, ShapeClass::s_shaped, kSmoothnessInf, 0.0, 1.0 / 3.0, DecayTarget::sigma,
      {{"alpha", 3.0}, {"beta", 2.0}});
  // non-smooth S-shaped
  add("softsign", kSoftsign, ShapeClass::s_shaped, 2, 1.0, 0.5, DecayTarget::sigma, {}, {{0.0, 1}});
  add("hardsigmoid", kHardSigmoid, ShapeClass::piecewise_linear, 1, 0.0, 1.0, DecayTarget::sigma, {},
      {{-1.0, 0}, {1.0, 0}});
  add("hardtanh", kHardTanh, ShapeClass::piecewise_linear, 1, 1.0, 0.5, DecayTarget::sigma, {},
      {{-1.0, 0}, {1.0, 0}});
  // non-smooth ReLU-shaped
  add("elu", kELU, ShapeClass::relu_shaped, 2, 0.0, 1.0, DecayTarget::sigma_over_x, {{"alpha", 1.0}},
      {{0.0, 1}});
  add("elu_alpha2", kELU, ShapeClass::relu_shaped, 1, 0.0, 1.0, DecayTarget::sigma_over_x,
      {{"alpha", 2.0}}, {{0.0, 0}});
  add("celu", kCELU, ShapeClass::relu_shaped, 2, 0.0, 1.0, DecayTarget::sigma_over_x, {{"beta", 1.0}},
      {{0.0, 1}});
  add("selu", kSELU, ShapeClass::relu_shaped, 1, 0.0, 1.0 / selu_l, DecayTarget::sigma_over_x,
      {{"alpha", selu_a}, {"lambda", selu_l}}, {{0.0, 0}});
  add("selu_alpha1", kSELU, ShapeClass::relu_shaped, 2, 0.0, 1.0 / selu_l, DecayTarget::sigma_over_x,
      {{"alpha", 1.0}, {"lambda", selu_l}}, {{0.0, 1}});
  // smooth ReLU-shaped; softplus is centered by -ln 2 through its normalization
  add("softplus", kSoftplus, ShapeClass::relu_shaped, kSmoothnessInf, -std::log(2.0), 1.0,
      DecayTarget::sigma_over_x);
  add("silu", kSiLU, ShapeClass::relu_shaped, kSmoothnessInf, 0.0, 1.0, DecayTarget::sigma_over_x);
  add("mish", kMish, ShapeClass::relu_shaped, kSmoothnessInf, 0.0, 1.0, DecayTarget::sigma_over_x);
  add("gelu", kGELU, ShapeClass::relu_shaped, kSmoothnessInf, 0.0, 1.0, DecayTarget::sigma_over_x);
  // piecewise linear rectifiers
  add("relu", kReLU, ShapeClass::piecewise_linear, 1, 0.0, 1.0, DecayTarget::sigma_over_x, {},
      {{0.0, 0}});
  add("leaky_relu", kLeakyReLU, ShapeClass::piecewise_linear, 1, 0.0, 1.0, DecayTarget::sigma_over_x,
      {{"slope", 0.01}}, {{0.0, 0}}, false);
  // powers of ReLU; outside Condition 1, used as activations by the
  // finite-difference route
  for (int k = 2; k <= 4; ++k)
    add("relu" + std::to_string(k), kReLUPow, ShapeClass::relu_shaped, k, 0.0, 1.0,
        DecayTarget::sigma_over_x, {{"k", double(k)}}, {{0.0, k - 1}}, false);

  return cat;
}

const Activation& find_activation(const std::string& name) {
  static const std::vector<Activation> cat = activation_catalog();
  for (const auto& a : cat)
    if (a.name == name) return a;
  throw std::invalid_argument("unknown activation: " + name);
}

bool activation_exists(const std::string& name) {
  static const std::vector<Activation> cat = activation_catalog();
  for (const auto& a : cat)
    if (a.name == name) return true;
  return false;
}

}  // namespace supconv
