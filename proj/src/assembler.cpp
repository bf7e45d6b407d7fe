#include "supconv/assembler.hpp"

#include <cmath>

#include "supconv/staircase.hpp"

namespace supconv {

int AssemblyPlan::J() const {
  return int(std::pow(std::floor(std::pow(double(N), 1.0 / d)), 2.0) *
             std::floor(std::pow(double(L), 2.0 / d)));
}

void AssemblyPlan::validate() const {
  if (d < 1 || d > 2) throw BuildError("plan: d <= 2 supported");
  if (!(m < n)) throw BuildError("plan: m < n required");
  if (std::log2(double(N)) > double(L) + 1e-12) throw BuildError("plan: log2 N <= L required");
  if (J() < 1) throw BuildError("plan: degenerate J");
  if (target.dim != d) throw BuildError("plan: target dimension mismatch");
  if (n - 1 > kMaxJetOrder) throw BuildError("plan: polynomial degree exceeds jet order cap");
  double guard = std::pow(2.0, d) * std::pow(double(n), d + 1) * double(N) * std::log2(8.0 * N);
  if (guard > 1e5) throw BuildError("plan: width guard exceeded (desk-scale limit)");
}

nlohmann::json AssemblyReport::to_json() const {
  nlohmann::json j;
  j["predicted_error"] = predicted_error;
  j["coeff_bound"] = coeff_bound;
  j["tolerances"] = tolerances;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : budgets)
    arr.push_back({{"stage", b.stage},
                   {"width_budget", b.width_budget},
                   {"depth_budget", b.depth_budget},
                   {"actual_width", b.actual_width},
                   {"actual_depth", b.actual_depth},
                   {"ok", b.ok()}});
  j["budgets"] = arr;
  return j;
}

namespace {

double clampv(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// retry a tolerance-parameterized build with relaxation when the fp floor
// makes the first target unreachable
template <typename F>
Network with_relax(F&& build, double tol0, double factor, int attempts, double* used_tol) {
  double tol = tol0;
  for (int a = 0; a < attempts; ++a) {
    try {
      Network net = build(tol);
      if (used_tol) *used_tol = tol;
      return net;
    } catch (const BuildError&) {
      if (a + 1 == attempts) throw;
      tol *= factor;
    }
  }
  throw BuildError("with_relax: unreachable");
}

Network selector(int d, int j) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1, d);
  A(0, j) = 1.0;
  return make_affine(A, Eigen::VectorXd::Zero(1));
}

struct Stages {
  double predicted = 0.0;
  double bound = 0.0;  // C2 ||f||_{W^{n-1}}
  double tol_stair = 0.0, tol_fit = 0.0, tol_mono = 0.0, tol_prod = 0.0;
};

Stages plan_stages(const AssemblyPlan& plan) {
  Stages st;
  const int J = plan.J();
  Box box = plan.d == 1 ? box1(0.0, 1.0) : box2(0.0, 1.0, 0.0, 1.0);
  GridSpec gs;
  gs.per_dim = plan.d == 1 ? 513 : 65;
  double fn1 = sobolev_norm(jets_of(plan.target), box, plan.n - 1, gs);
  double fn = sobolev_norm(jets_of(plan.target), box, plan.n, gs);
  st.bound = averaged_taylor_constant(plan.n, plan.d) * fn1;
  double nl = double(plan.N) * double(plan.L);
  st.predicted = 4.0 * st.bound * std::pow(nl, -2.0 * plan.n) +
                 fn * std::pow(double(J), -double(plan.n - plan.m));
  const auto& set = MultiIndexSet::get(plan.d, plan.n - 1);
  const double n_alpha = double(set.size());
  st.tol_fit = clampv(st.predicted / (12.0 * 2.0 * st.bound * n_alpha), 1e-9, 0.05);
  st.tol_stair = clampv(1.0 / (16.0 * std::pow(double(J) + 1.0, plan.d)), 1e-9, 0.05);
  st.tol_mono = clampv(st.predicted / (12.0 * n_alpha * (1.0 + st.bound)), 1e-8, 0.05);
  st.tol_prod = clampv(st.predicted / (12.0 * n_alpha), 1e-8, 0.05);
  return st;
}

// converted staircase for one coordinate family, scale searched on plateaus
Network converted_staircase(const AssemblyPlan& plan, int which, double tol) {
  const int J = plan.J();
  const int steps = which == 1 ? J : J + 1;
  Network relu_stair = build_staircase(J, 1.0 / (4.0 * J), plan.N, plan.L, steps, 1.0 / double(J));
  if (which == 2)
    relu_stair = affine_pre(relu_stair, Eigen::MatrixXd::Identity(1, 1),
                            Eigen::VectorXd::Constant(1, 1.0 / (2.0 * J)));
  OmegaGeometry geo(1, J);

  auto measure = [&](double K) {
    Network conv =
        convert_relu_network(relu_stair, plan.activation, K, box1(-0.1, 1.1), plan.opts);
    double worst = 0.0;
    GridSpec gs;
    gs.per_dim = 33;
    gs.random_points = 4;
    for (int i = 0; i < steps; ++i) {
      auto [lo, hi] = geo.cell_interval(which, i);
      if (!(hi > lo)) continue;
      TargetFunction c = make_target("const:" + std::to_string(i));
      worst = std::max(worst,
                       sobolev_error(jets_of(c), jets_of(conv), box1(lo, hi), plan.m, gs).combined);
    }
    return worst;
  };
  BuildOptions so = plan.opts;
  so.K_start = std::max(plan.opts.K_start, 64.0 * J);
  double K = search_scale(measure, tol, so);
  Network conv = convert_relu_network(relu_stair, plan.activation, K, box1(-0.1, 1.1), plan.opts);
  conv.provenance = {{"construction", "staircase_converted"}, {"K", K}, {"steps", steps}};
  return conv;
}

// converted coefficient-lookup net, checked at the integer cell indices
Network converted_fit(const AssemblyPlan& plan, const std::vector<double>& xi, double tol) {
  Network relu_fit = fit_points(xi, plan.N, plan.L, plan.n, FitPointsLayout::direct);
  const int T = int(xi.size());
  auto measure = [&](double K) {
    Network conv = convert_relu_network(relu_fit, plan.activation, K, std::nullopt, plan.opts);
    double worst = 0.0;
    Eigen::VectorXd p(1);
    for (int i = 0; i < T; ++i) {
      for (double off : {0.0, -0.05, 0.05}) {
        p[0] = double(i) + off;
        Jet jc = conv.evaluate_jet(p, plan.m);
        double want = off == 0.0 ? relu_fit.evaluate(p)[0] : jc.value();
        worst = std::max(worst, std::abs(jc.value() - want));
        for (int k = 1; k <= plan.m; ++k) {
          MultiIndex a{std::uint8_t(k), 0, 0, 0};
          worst = std::max(worst, std::abs(jc.deriv(a)));
        }
      }
    }
    return worst;
  };
  BuildOptions so = plan.opts;
  so.K_start = std::max(plan.opts.K_start, 1e4);
  double K = search_scale(measure, tol, so);
  Network conv = convert_relu_network(relu_fit, plan.activation, K, std::nullopt, plan.opts);
  conv.provenance = {{"construction", "fit_points_converted"},
                     {"K", K},
                     {"bits", relu_fit.provenance["bits"]}};
  return conv;
}

}  // namespace

Network build_local_approx(const AssemblyPlan& plan, const VmPattern& vm, AssemblyReport* report) {
  plan.validate();
  if (int(vm.size()) != plan.d) throw BuildError("build_local_approx: pattern dimension mismatch");
  const Activation& act = find_activation(plan.activation);
  if (plan.m > act.smoothness_order) throw BuildError("build_local_approx: m above smoothness");
  const int J = plan.J();
  const int d = plan.d;
  Stages st = plan_stages(plan);

  // local polynomial tables and their encoded point values
  PiecewisePoly pp = local_piecewise(plan.target, J, vm, plan.n);
  const auto& set = MultiIndexSet::get(d, plan.n - 1);
  for (const auto& cell : pp.table)
    for (const auto& [a, g] : cell)
      if (std::abs(g) > st.bound * (1.0 + 1e-9))
        throw BuildError("build_local_approx: coefficient bound violated");

  // per-coordinate staircases (shared by every coefficient lookup)
  std::vector<Network> stairs;
  double used_stair_tol = 0.0;
  for (int j = 0; j < d; ++j) {
    Network s1 = with_relax(
        [&](double t) { return converted_staircase(plan, vm[size_t(j)], t); }, st.tol_stair, 4.0,
        3, &used_stair_tol);
    if (d == 2) s1 = compose(s1, selector(d, j));
    stairs.push_back(std::move(s1));
  }
  // idx(x) = sum_j stride_j * stair_j(x_j), the eta bijection realized on the
  // staircase outputs directly
  Network idx_net;
  {
    Network stack = d == 1 ? stairs[0] : parallel(stairs);
    Eigen::MatrixXd strides(1, d);
    int stride = 1;
    for (int j = 0; j < d; ++j) {
      strides(0, j) = double(stride);
      stride *= pp.sizes[size_t(j)];
    }
    idx_net = affine_post(stack, strides, Eigen::VectorXd::Zero(1));
  }

  // coefficient nets phi_alpha = decode(fit(idx))
  std::vector<Network> coeff_nets;
  double used_fit_tol = 0.0;
  for (int ai = 0; ai < set.size(); ++ai) {
    const MultiIndex& alpha = set.at(ai);
    std::vector<double> xi(size_t(pp.cells()));
    for (int p = 0; p < pp.cells(); ++p) {
      auto it = pp.cell_coeffs(p).find(alpha);
      double g = it == pp.cell_coeffs(p).end() ? 0.0 : it->second;
      xi[size_t(p)] = clampv((g + st.bound) / (2.0 * st.bound), 0.0, 1.0);
    }
    Network fitc = with_relax([&](double t) { return converted_fit(plan, xi, t); }, st.tol_fit,
                              4.0, 3, &used_fit_tol);
    Network dec = affine_post1(compose(fitc, idx_net), 2.0 * st.bound, -st.bound);
    coeff_nets.push_back(std::move(dec));
  }

  // monomial nets phi_{3,alpha}
  std::vector<Network> mono_nets;
  for (int ai = 0; ai < set.size(); ++ai) {
    const MultiIndex& alpha = set.at(ai);
    if (mi_total(alpha) == 0) {
      Network one = make_affine(Eigen::MatrixXd::Zero(1, d), Eigen::VectorXd::Constant(1, 1.0));
      one.set_activation(act);
      mono_nets.push_back(std::move(one));
    } else {
      mono_nets.push_back(
          build_monomial(plan.activation, alpha, d, 1.0, plan.m, st.tol_mono, plan.opts));
    }
  }

  // product recombination
  BuildRequest pr;
  pr.activation = plan.activation;
  pr.M = st.bound * 1.05 + 2.0;
  pr.m = plan.m;
  pr.target_eps = st.tol_prod;
  pr.opts = plan.opts;
  Network prod = build_primitive(PrimitiveKind::product, pr);

  std::vector<Network> terms;
  for (int ai = 0; ai < set.size(); ++ai) {
    Network pair = parallel({coeff_nets[size_t(ai)], mono_nets[size_t(ai)]});
    terms.push_back(compose(prod, pair));
  }
  Network net = linear_combination(terms, std::vector<double>(terms.size(), 1.0));

  const double width_budget =
      192.0 * std::pow(double(plan.n), d + 1) * (plan.N + 1) * std::log2(8.0 * plan.N);
  const double depth_budget =
      10.0 * (plan.L + 2) * std::log2(4.0 * plan.L) + 8.0 * plan.L + plan.n + 11.0;
  assert_budget(net, width_budget, depth_budget, "build_local_approx");

  net.provenance = {{"construction", "local_approx"},
                    {"vm", vm},
                    {"activation", plan.activation},
                    {"target", plan.target.name},
                    {"n", plan.n},
                    {"m", plan.m},
                    {"N", plan.N},
                    {"L", plan.L},
                    {"J", J}};
  if (report) {
    report->predicted_error = st.predicted;
    report->coeff_bound = st.bound;
    report->tolerances["staircase"] = used_stair_tol;
    report->tolerances["fit_points"] = used_fit_tol;
    report->tolerances["monomial"] = st.tol_mono;
    report->tolerances["product"] = st.tol_prod;
    report->budgets.push_back({"local_approx:" + plan.target.name, width_budget, depth_budget,
                               net.declared_width, net.declared_depth});
  }
  return net;
}

Network build_full_approx(const AssemblyPlan& plan, AssemblyReport* report) {
  plan.validate();
  Stages st = plan_stages(plan);
  const int d = plan.d;
  Box box = d == 1 ? box1(0.0, 1.0) : box2(0.0, 1.0, 0.0, 1.0);

  std::vector<Network> terms;
  double phi_norm_max = 1.0;
  std::vector<Network> locals;
  for (const auto& vm : all_patterns(d)) {
    locals.push_back(build_local_approx(plan, vm, report));
    GridSpec gs;
    gs.per_dim = d == 1 ? 257 : 33;
    gs.random_points = 32;
    phi_norm_max = std::max(phi_norm_max, sobolev_norm(jets_of(locals.back()), box, plan.m, gs));
  }

  double eps_pou0 =
      clampv(st.predicted / (8.0 * std::pow(2.0, d) * (1.0 + phi_norm_max)), 3e-6, 0.02);
  double used_pou_tol = 0.0;
  std::vector<Network> pous;
  for (const auto& vm : all_patterns(d)) {
    pous.push_back(with_relax(
        [&](double t) { return build_pou_network(plan.activation, vm, plan.N, plan.L, plan.m, t,
                                                 plan.opts); },
        eps_pou0, 4.0, 4, &used_pou_tol));
  }

  BuildRequest pr;
  pr.activation = plan.activation;
  pr.M = phi_norm_max * 1.1 + 2.0;
  pr.m = plan.m;
  pr.target_eps = clampv(st.predicted / (8.0 * std::pow(2.0, d)), 1e-8, 0.02);
  pr.opts = plan.opts;
  Network hat = build_primitive(PrimitiveKind::product, pr);

  const auto patterns = all_patterns(d);
  for (size_t i = 0; i < patterns.size(); ++i) {
    Network pair = parallel({locals[i], pous[i]});
    terms.push_back(compose(hat, pair));
  }
  Network net = linear_combination(terms, std::vector<double>(terms.size(), 1.0));

  const double width_budget = std::pow(2.0, d) * 192.0 * std::pow(double(plan.n), d + 1) *
                              (plan.N + 1) * std::log2(8.0 * plan.N);
  const double depth_budget =
      10.0 * (plan.L + 2) * std::log2(4.0 * plan.L) + 8.0 * plan.L + plan.n + d + 12.0;
  assert_budget(net, width_budget, depth_budget, "build_full_approx");

  net.provenance = {{"construction", "full_approx"},
                    {"activation", plan.activation},
                    {"target", plan.target.name},
                    {"n", plan.n},
                    {"m", plan.m},
                    {"N", plan.N},
                    {"L", plan.L},
                    {"J", plan.J()}};
  if (report) {
    report->tolerances["pou"] = used_pou_tol;
    report->tolerances["hat_product"] = pr.target_eps;
    report->budgets.push_back({"full_approx:" + plan.target.name, width_budget, depth_budget,
                               net.declared_width, net.declared_depth});
  }
  return net;
}

}  // namespace supconv
