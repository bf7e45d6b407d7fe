#include "supconv/partition.hpp"

#include <cmath>

#include "supconv/staircase.hpp"

namespace supconv {

BumpTemplate::BumpTemplate(int m) : sm_(solve_sm(m)) {
  // piece differences across each knot expand exactly in powers m+1..2m+1:
  //   knot 0: S_m(u); knot 1: 1 - S_m(1+u); knot 2: -S_m(u); knot 3: -(knot 1)
  const auto& c = sm_.coeffs();
  for (auto& v : spline_) v.assign(size_t(m + 1), 0.0);
  for (int p = m + 1; p <= 2 * m + 1; ++p) {
    double c0 = c[size_t(p)];
    // coefficient of u^p in S_m(1+u) - 1 (binomial re-centering)
    double c1 = 0.0;
    for (size_t k = size_t(p); k < c.size(); ++k) {
      double binom = 1.0;
      for (int i = 0; i < p; ++i) binom = binom * double(int(k) - i) / double(i + 1);
      c1 += c[k] * binom;
    }
    spline_[0][size_t(p - m - 1)] = c0;
    spline_[1][size_t(p - m - 1)] = -c1;
    spline_[2][size_t(p - m - 1)] = -c0;
    spline_[3][size_t(p - m - 1)] = c1;
  }
}

double BumpTemplate::spline_coeff(int knot, int power) const {
  int m = sm_.m();
  if (knot < 0 || knot > 3 || power < m + 1 || power > 2 * m + 1)
    throw std::out_of_range("BumpTemplate::spline_coeff");
  return spline_[size_t(knot)][size_t(power - m - 1)];
}

double BumpTemplate::eval(double x) const {
  if (x <= 0.0 || x >= 3.0) return 0.0;
  if (x < 1.0) return sm_.eval(x);
  if (x <= 2.0) return 1.0;
  return sm_.eval(3.0 - x);
}

Series BumpTemplate::series(double x, int order) const {
  int m = sm_.m();
  bool knot = x == 0.0 || x == 1.0 || x == 2.0 || x == 3.0;
  if (knot && order > m)
    throw KinkError("bump template: derivative order above smoothness at a knot");
  if (x < 0.0 || x > 3.0 || (knot && (x == 0.0 || x == 3.0)))
    return Series(order);  // identically zero piece (knot orders <= m all vanish)
  if (x > 0.0 && x < 1.0) return sm_.series(x, order);
  if (x > 2.0 && x < 3.0) {
    Series s = sm_.series(3.0 - x, order);
    for (int k = 1; k <= order; k += 2) s.c[size_t(k)] = -s.c[size_t(k)];
    return s;
  }
  // plateau (including knots 1 and 2 at admissible orders)
  Series s(order);
  s.c[0] = 1.0;
  return s;
}

BumpFamily::BumpFamily(int m, int J) : tmpl_(m), J_(J) {
  if (J < 1) throw std::invalid_argument("BumpFamily: J >= 1 required");
}

namespace {

// local coordinate of the bump covering x for s_1: u = 4Jx - 4i
double bump_local(double x, int J, int* index) {
  double u = 4.0 * double(J) * x;
  double i = std::floor(u / 4.0);
  if (index) *index = int(i);
  return u - 4.0 * i;
}

}  // namespace

double BumpFamily::eval1d(int which, double x) const {
  double xs = which == 1 ? x : x + 1.0 / (2.0 * double(J_));
  double u = bump_local(xs, J_, nullptr);
  return u <= 3.0 ? tmpl_.eval(u) : 0.0;
}

Series BumpFamily::series1d(int which, double x, int order) const {
  double xs = which == 1 ? x : x + 1.0 / (2.0 * double(J_));
  double u = bump_local(xs, J_, nullptr);
  Series inner = tmpl_.series(std::min(u, 4.0), order);
  if (u > 3.0) inner = Series(order);
  // chain rule for the affine rescaling u = 4J xs - 4i
  double scale = 4.0 * double(J_);
  double p = 1.0;
  for (int k = 0; k <= order; ++k) {
    inner.c[size_t(k)] *= p;
    p *= scale;
  }
  return inner;
}

double BumpFamily::eval(const VmPattern& vm, const Eigen::VectorXd& x) const {
  double v = 1.0;
  for (int j = 0; j < int(vm.size()); ++j) v *= eval1d(vm[size_t(j)], x[j]);
  return v;
}

Jet BumpFamily::jet(const VmPattern& vm, const Eigen::VectorXd& x, int order) const {
  const int d = int(vm.size());
  Jet acc = jet_constant(1.0, d, order);
  for (int j = 0; j < d; ++j) {
    Series s = series1d(vm[size_t(j)], x[j], order);
    acc = jet_mul(acc, jet_compose_univariate(s, jet_variable(x, j, order)));
  }
  return acc;
}

double eval_partition(const VmPattern& vm, const Eigen::VectorXd& x, int J, int m) {
  for (int j = 0; j < x.size(); ++j)
    if (x[j] < 0.0 || x[j] > 1.0) throw std::domain_error("eval_partition: x outside [0,1]^d");
  return BumpFamily(m, J).eval(vm, x);
}

Jet eval_partition_jet(const VmPattern& vm, const Eigen::VectorXd& x, int J, int m, int order) {
  for (int j = 0; j < x.size(); ++j)
    if (x[j] < 0.0 || x[j] > 1.0) throw std::domain_error("eval_partition: x outside [0,1]^d");
  return BumpFamily(m, J).jet(vm, x, order);
}

std::pair<double, double> OmegaGeometry::cell_interval_unclipped(int vm_component, int i) const {
  double J = double(J_);
  if (vm_component == 1) return {double(i) / J, (4.0 * i + 3.0) / (4.0 * J)};
  return {(4.0 * i - 2.0) / (4.0 * J), (4.0 * i + 1.0) / (4.0 * J)};
}

std::pair<double, double> OmegaGeometry::cell_interval(int vm_component, int i) const {
  auto [lo, hi] = cell_interval_unclipped(vm_component, i);
  return {std::max(lo, 0.0), std::min(hi, 1.0)};
}

bool OmegaGeometry::in_omega_1d(int vm_component, double x) const {
  return cell_index_1d(vm_component, x) >= 0;
}

int OmegaGeometry::cell_index_1d(int vm_component, double x) const {
  if (x < 0.0 || x > 1.0) return -1;
  double J = double(J_);
  if (vm_component == 1) {
    int i = std::min(int(std::floor(x * J)), J_ - 1);
    auto [lo, hi] = cell_interval(1, i);
    return (x >= lo && x <= hi) ? i : -1;
  }
  int i = std::min(std::max(int(std::floor(x * J + 0.5)), 0), J_);
  auto [lo, hi] = cell_interval(2, i);
  return (x >= lo && x <= hi) ? i : -1;
}

bool OmegaGeometry::in_omega(const VmPattern& vm, const Eigen::VectorXd& x) const {
  for (int j = 0; j < d_; ++j)
    if (!in_omega_1d(vm[size_t(j)], x[j])) return false;
  return true;
}

bool OmegaGeometry::covered(const Eigen::VectorXd& x) const {
  for (int j = 0; j < d_; ++j)
    if (!in_omega_1d(1, x[j]) && !in_omega_1d(2, x[j])) return false;
  return true;
}

std::vector<VmPattern> all_patterns(int d) {
  std::vector<VmPattern> out;
  for (int mask = 0; mask < (1 << d); ++mask) {
    VmPattern vm(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) vm[size_t(j)] = (mask >> j) & 1 ? 2 : 1;
    out.push_back(std::move(vm));
  }
  return out;
}

namespace {

// spline stage: v -> sum_{i,j} c_ij ReLUj(v - i) via relu-power surrogates;
// the two distinct power blocks are built once and reused across knots
Network spline_stage(const std::string& activation, const BumpTemplate& tmpl, int m, double K2,
                     double block_eps, const BuildOptions& opts) {
  std::map<int, Network> powers;
  for (int p = m + 1; p <= 2 * m + 1; ++p)
    powers.emplace(p, build_relu_power(activation, p - 1, K2, 4.5, opts, block_eps));
  std::vector<Network> blocks;
  std::vector<double> weights;
  for (int knot = 0; knot <= 3; ++knot) {
    for (int p = m + 1; p <= 2 * m + 1; ++p) {
      double c = tmpl.spline_coeff(knot, p);
      if (c == 0.0) continue;
      blocks.push_back(affine_pre(powers.at(p), Eigen::MatrixXd::Identity(1, 1),
                                  Eigen::VectorXd::Constant(1, -double(knot))));
      weights.push_back(c);
    }
  }
  Padding pad;
  Network idn;
  if (!opts.exact_skip) {
    BuildRequest r;
    r.activation = activation;
    r.M = 5.0;
    r.m = m;
    r.target_eps = block_eps;
    r.opts = opts;
    idn = build_primitive(PrimitiveKind::identity, r);
    pad.identity_prototype = &idn;
  }
  return linear_combination(blocks, weights, pad);
}

std::vector<double> knot_avoid_list(int J) {
  std::vector<double> avoid;
  for (int k = 0; k <= 4 * J + 4; ++k) avoid.push_back(double(k) / (4.0 * double(J)));
  return avoid;
}

}  // namespace

Network build_pou_network(const std::string& activation, const VmPattern& vm, int N, int L, int m,
                          double target_eps, const BuildOptions& opts) {
  const int d = int(vm.size());
  if (d < 1 || d > 2) throw BuildError("build_pou_network: d <= 2 supported");
  if (std::log2(double(N)) > double(L) + 1e-12)
    throw BuildError("build_pou_network: requires log2 N <= L");
  const Activation& act = find_activation(activation);
  if (m > act.smoothness_order) throw BuildError("build_pou_network: m above activation smoothness");

  const int J = int(std::pow(std::floor(std::pow(double(N), 1.0 / d)), 2.0) *
                    std::floor(std::pow(double(L), 2.0 / d)));
  if (J < 1) throw BuildError("build_pou_network: degenerate J");
  BumpFamily fam(m, J);
  const std::vector<double> avoid = knot_avoid_list(J);

  // sawtooth sized to cover [0, 1 + 5/(8J)] after the family shift
  int base_teeth = std::max(1, int(std::floor(std::pow(double(N), 1.0 / d))) / 2);
  int teeth_needed = (J + 1) / 2 + 2;
  int folds = 0;
  while (base_teeth << folds < teeth_needed) ++folds;
  Network saw = build_sawtooth(folds, base_teeth, J);

  // derivative errors of the spline stage are amplified by (4J)^m once the
  // sawtooth rescaling is composed in, so its tolerance is set in v-space
  const double amp = std::pow(4.0 * double(J), m);
  const double spline_tol = std::max(target_eps / (3.0 * amp), 2.5e-9);
  const double block_eps = std::max(spline_tol / 10.0, 1.2e-9);

  // stage 1: search the surrogate scale K2 against the bump template
  TargetFunction tmpl_oracle;
  tmpl_oracle.name = "bump_template";
  tmpl_oracle.dim = 1;
  const BumpTemplate* tp = &fam.tmpl();
  tmpl_oracle.deriv = [tp](const Eigen::VectorXd& x, const MultiIndex& a) {
    return tp->series(x[0], a[0]).deriv(a[0]);
  };
  GridSpec vgrid;
  vgrid.per_dim = 1025;
  vgrid.random_points = opts.search_random;
  for (int k = -1; k <= 4; ++k) vgrid.avoid.push_back(double(k));
  BuildOptions so = opts;
  so.K_start = std::max(opts.K_start, 1000.0);
  double K2 = search_scale(
      [&](double K2c) {
        Network sp = spline_stage(activation, fam.tmpl(), m, K2c, block_eps, opts);
        return sobolev_error(jets_of(tmpl_oracle), jets_of(sp), box1(-0.45, 3.45), m, vgrid)
            .combined;
      },
      spline_tol, so);
  Network spline = spline_stage(activation, fam.tmpl(), m, K2, block_eps, opts);

  // stage 2: per-coordinate conversion scale K for the sawtooth
  auto coordinate_net = [&](int which, double K) {
    Network conv = convert_relu_network(saw, activation, K, box1(-0.2, 1.4), opts, block_eps);
    double shift = (which == 1 ? 1.0 : 5.0) / (8.0 * double(J));
    conv = affine_pre(conv, Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Constant(1, shift));
    Network sp = affine_pre(spline, Eigen::MatrixXd::Constant(1, 1, 4.0 * double(J)),
                            Eigen::VectorXd::Constant(1, -0.5));
    return compose(sp, conv);
  };
  auto measure_coord = [&](int which, double K) {
    Network net = coordinate_net(which, K);
    TargetFunction oracle;
    oracle.name = "s_vm_coord";
    oracle.dim = 1;
    oracle.deriv = [&fam, which](const Eigen::VectorXd& x, const MultiIndex& a) {
      return fam.series1d(which, x[0], a[0]).deriv(a[0]);
    };
    GridSpec gs;
    gs.per_dim = opts.search_per_dim;
    gs.random_points = opts.search_random;
    gs.avoid = avoid;
    return sobolev_error(jets_of(oracle), jets_of(net), box1(0.0, 1.0), m, gs).combined;
  };

  BuildOptions co = opts;
  co.K_start = std::max(opts.K_start, 64.0 * J);
  std::vector<Network> coords;
  double usedK = 0.0;
  for (int j = 0; j < d; ++j) {
    int which = vm[size_t(j)];
    double K = search_scale([&](double Kc) { return measure_coord(which, Kc); },
                            target_eps * (d == 1 ? 1.0 : 0.45), co);
    usedK = K;
    Network cnet = coordinate_net(which, K);
    if (d == 2) {
      Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(1, 2);
      sel(0, j) = 1.0;
      cnet = affine_pre(cnet, sel, Eigen::VectorXd::Zero(1));
    }
    coords.push_back(std::move(cnet));
  }

  Network net;
  if (d == 1) {
    net = coords[0];
  } else {
    BuildRequest r;
    r.activation = activation;
    r.M = 2.0;
    r.m = m;
    r.target_eps = block_eps;
    r.opts = opts;
    Padding pad;
    Network idn;
    if (!opts.exact_skip) {
      idn = build_primitive(PrimitiveKind::identity, r);
      pad.identity_prototype = &idn;
    }
    Network prod = build_primitive(PrimitiveKind::product, r);
    net = compose(prod, parallel(coords, pad));
  }

  // final verification on the full domain
  {
    TargetFunction oracle;
    oracle.name = "s_vm";
    oracle.dim = d;
    oracle.deriv = [&fam, vm](const Eigen::VectorXd& x, const MultiIndex& a) {
      Jet j = fam.jet(vm, x, mi_total(a));
      return j.deriv(a);
    };
    Box box = d == 1 ? box1(0.0, 1.0) : box2(0.0, 1.0, 0.0, 1.0);
    GridSpec gs;
    gs.per_dim = d == 1 ? opts.search_per_dim : opts.search_per_dim_2d;
    gs.random_points = opts.search_random;
    gs.avoid = avoid;
    double err = sobolev_error(jets_of(oracle), jets_of(net), box, m, gs).combined;
    if (err > target_eps) throw BuildError("build_pou_network: measured error above target");
    net.provenance = {{"construction", "pou"},
                      {"vm", vm},
                      {"J", J},
                      {"m", m},
                      {"N", N},
                      {"L", L},
                      {"K", usedK},
                      {"K2", K2},
                      {"target_eps", target_eps},
                      {"measured_error", err}};
  }
  assert_budget(net, double(d) * (2.0 * N + 120.0 * m + 200.0),
                3.0 * L + 2.0 * m + d - 1.0 +
                    (act.decay_target == DecayTarget::sigma_over_x ? 0.0 : 1.0),
                "build_pou_network");
  return net;
}

}  // namespace supconv
