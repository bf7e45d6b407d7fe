#include "supconv/builders.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "supconv/audit.hpp"

namespace supconv {

void assert_budget(const Network& net, double width_budget, double depth_budget,
                   const std::string& what) {
  if (double(net.declared_width) > width_budget || double(net.declared_depth) > depth_budget) {
    std::ostringstream os;
    os << what << ": budget violation, width " << net.declared_width << " vs " << width_budget
       << ", depth " << net.declared_depth << " vs " << depth_budget;
    throw BuildError(os.str());
  }
}

double search_scale(const std::function<double(double)>& measure, double eps,
                    const BuildOptions& opts) {
  double K = opts.K_start;
  double best_err = std::numeric_limits<double>::infinity();
  double best_K = K;
  int worse_streak = 0;
  while (K <= opts.K_max) {
    double err = measure(K);
    if (std::isfinite(err) && err <= eps) return K;
    if (err < best_err) {
      best_err = err;
      best_K = K;
      worse_streak = 0;
    } else if (++worse_streak >= 3) {
      break;  // past the fp noise floor, no point escalating K further
    }
    K *= 2.0;
  }
  std::ostringstream os;
  os << "requested eps " << eps << " unreachable within K <= " << opts.K_max << " (best " << best_err
     << " at K=" << best_K << ")";
  throw BuildError(os.str());
}

namespace {

const Activation& act_ref(const std::string& name) { return find_activation(name); }

// ---------------------------------------------------------------------------
// square-form recursion: f_s as a signed combination of scaled activations
// ---------------------------------------------------------------------------

// f(u) = sum_j w_j sigma(s_j u + a); coefficient i of its Taylor expansion at
// u=0 is sum_j w_j sigma^{(i)}(a) s_j^i / i!
struct SquareForm {
  double a = 0.0;    // Condition-2 witness
  double a22 = 0.0;  // surviving quadratic coefficient of f_2
  std::vector<std::pair<double, double>> terms;  // (w_j, s_j)
};

double form_coeff(const std::vector<std::pair<double, double>>& terms, const Series& s0, int i) {
  double c = 0.0;
  for (const auto& [w, s] : terms) c += w * s0.c[size_t(i)] * std::pow(s, i);
  return c;
}

SquareForm square_form(const Activation& act) {
  SquareForm f;
  f.a = condition2_witness(act);
  Series s0 = act.series(f.a, 2);
  f.terms = {{1.0, 1.0}};
  for (int s = 1; s <= 2; ++s) {
    double c = form_coeff(f.terms, s0, s - 1);
    std::vector<std::pair<double, double>> next;
    if (std::abs(c) < 1e-12) {
      next = f.terms;  // coefficient already vanished
    } else if (std::abs(std::abs(c) - 1.0) < 1e-9) {
      for (const auto& [w, sc] : f.terms) {
        next.emplace_back(2.0 * w, sc / (2.0 * c));
        next.emplace_back(-2.0 * std::pow(2.0 * c, -(s - 1)) * w, sc);
      }
    } else {
      for (const auto& [w, sc] : f.terms) {
        next.emplace_back(w, sc / c);
        next.emplace_back(-std::pow(c, -(s - 1)) * w, sc);
      }
    }
    f.terms = std::move(next);
  }
  f.a22 = form_coeff(f.terms, s0, 2);
  if (std::abs(f.a22) < 1e-12)
    throw BuildError(act.name + ": quadratic coefficient vanished in the square recursion");
  return f;
}

// phi(x) = (K^2/a22) f_2(x/K): one hidden layer of |terms| neurons
Network square_net(const Activation& act, const SquareForm& f, double K) {
  int n = int(f.terms.size());
  Eigen::MatrixXd W1(n, 1);
  Eigen::VectorXd b1(n);
  Eigen::MatrixXd W2(1, n);
  for (int j = 0; j < n; ++j) {
    W1(j, 0) = f.terms[size_t(j)].second / K;
    b1[j] = f.a;
    W2(0, j) = f.terms[size_t(j)].first * K * K / f.a22;
  }
  Network net({{W1, b1}, {W2, Eigen::VectorXd::Zero(1)}}, act);
  net.provenance = {{"construction", "square"}, {"K", K}, {"witness", f.a}};
  return net;
}

// phi(x,y) = (phi1(x+y) - phi1(x) - phi1(y)) / 2, fused into one hidden layer
Network product_net(const Activation& act, const SquareForm& f, double K) {
  int n = int(f.terms.size());
  Eigen::MatrixXd W1(3 * n, 2);
  Eigen::VectorXd b1 = Eigen::VectorXd::Constant(3 * n, f.a);
  Eigen::MatrixXd W2(1, 3 * n);
  for (int j = 0; j < n; ++j) {
    double s = f.terms[size_t(j)].second / K;
    double w = f.terms[size_t(j)].first * K * K / (2.0 * f.a22);
    W1(j, 0) = s;
    W1(j, 1) = s;  // x + y
    W1(n + j, 0) = s;
    W1(n + j, 1) = 0.0;  // x
    W1(2 * n + j, 0) = 0.0;
    W1(2 * n + j, 1) = s;  // y
    W2(0, j) = w;
    W2(0, n + j) = -w;
    W2(0, 2 * n + j) = -w;
  }
  Network net({{W1, b1}, {W2, Eigen::VectorXd::Zero(1)}}, act);
  net.provenance = {{"construction", "product"}, {"K", K}, {"witness", f.a}};
  return net;
}

// D_1 phi1(x) = (phi1(x+1) - phi1(x) - 1)/2
Network identity_net(const Activation& act, const SquareForm& f, double K) {
  int n = int(f.terms.size());
  Eigen::MatrixXd W1(2 * n, 1);
  Eigen::VectorXd b1(2 * n);
  Eigen::MatrixXd W2(1, 2 * n);
  for (int j = 0; j < n; ++j) {
    double s = f.terms[size_t(j)].second / K;
    double w = f.terms[size_t(j)].first * K * K / (2.0 * f.a22);
    W1(j, 0) = s;
    b1[j] = f.a + s;  // phi1(x+1)
    W1(n + j, 0) = s;
    b1[n + j] = f.a;
    W2(0, j) = w;
    W2(0, n + j) = -w;
  }
  Eigen::VectorXd b2(1);
  b2[0] = -0.5;
  Network net({{W1, b1}, {W2, b2}}, act);
  net.provenance = {{"construction", "identity"}, {"K", K}, {"witness", f.a}};
  return net;
}

// ---------------------------------------------------------------------------
// internal error measurement on [-M, M]^d; d >= 3 falls back to a
// low-discrepancy point cloud since the sup grids are capped at d <= 2
// ---------------------------------------------------------------------------

double measure_error(const Network& net, const TargetFunction& oracle, double M, int m,
                     const BuildOptions& opts) {
  int d = net.input_dim();
  if (d <= 2) {
    Box box = d == 1 ? box1(-M, M) : box2(-M, M, -M, M);
    GridSpec gs;
    gs.per_dim = d == 1 ? opts.search_per_dim : opts.search_per_dim_2d;
    gs.random_points = opts.search_random;
    return sobolev_error(oracle, net, box, m, gs).combined;
  }
  const double g[4] = {0.6180339887498949, 0.7548776662466927, 0.8191725133961645,
                       0.8566748838545029};
  Eigen::VectorXd p(d);
  double u[4] = {0.5, 0.5, 0.5, 0.5};
  double sup = 0.0;
  const auto& set = MultiIndexSet::get(d, m);
  for (int i = 0; i < 2048; ++i) {
    for (int j = 0; j < d; ++j) {
      u[j] = std::fmod(u[j] + g[j], 1.0);
      p[j] = -M + 2.0 * M * u[j];
    }
    Jet jo = oracle.jet(p, m), jn = net.evaluate_jet(p, m);
    for (int k = 0; k < set.size(); ++k)
      sup = std::max(sup, std::abs(jo.deriv(set.at(k)) - jn.deriv(set.at(k))));
  }
  return sup;
}

TargetFunction square_oracle() {
  return make_poly_target(1, {{MultiIndex{2, 0, 0, 0}, 1.0}});
}
TargetFunction product_oracle() {
  return make_poly_target(2, {{MultiIndex{1, 1, 0, 0}, 1.0}});
}
TargetFunction identity_oracle() {
  return make_poly_target(1, {{MultiIndex{1, 0, 0, 0}, 1.0}});
}

}  // namespace

namespace {

// builds are pure functions of the request; identical primitive requests recur
// across ladders and scale searches, so cache the results
std::mutex g_prim_mu;
std::map<std::string, Network> g_prim_cache;

std::string prim_key(PrimitiveKind kind, const BuildRequest& req) {
  std::ostringstream os;
  os.precision(17);
  os << int(kind) << '|' << req.activation << '|' << req.M << '|' << req.m << '|' << req.target_eps
     << '|' << req.K << '|' << req.opts.exact_skip << '|' << req.opts.search_per_dim << '|'
     << req.opts.search_per_dim_2d;
  return os.str();
}

}  // namespace

Network build_primitive(PrimitiveKind kind, const BuildRequest& req) {
  const Activation& act = act_ref(req.activation);
  if (req.m > act.smoothness_order)
    throw BuildError(act.name + ": error order exceeds activation smoothness");
  if ((req.target_eps > 0) == (req.K > 0))
    throw BuildError("build_primitive: exactly one of target_eps/K must be set");
  const std::string key = prim_key(kind, req);
  {
    std::lock_guard<std::mutex> lk(g_prim_mu);
    auto it = g_prim_cache.find(key);
    if (it != g_prim_cache.end()) return it->second;
  }
  SquareForm f = square_form(act);
  // the square behind product must cover x+y, behind identity must cover x+1
  double half = req.M;
  if (kind == PrimitiveKind::product) half = 2.0 * req.M;
  if (kind == PrimitiveKind::identity) half = req.M + 1.0;

  TargetFunction oracle = kind == PrimitiveKind::square    ? square_oracle()
                          : kind == PrimitiveKind::product ? product_oracle()
                                                           : identity_oracle();
  auto instantiate = [&](double K) {
    switch (kind) {
      case PrimitiveKind::square: return square_net(act, f, K);
      case PrimitiveKind::product: return product_net(act, f, K);
      default: return identity_net(act, f, K);
    }
  };

  double K = req.K;
  if (req.target_eps > 0) {
    auto measure = [&](double Kc) {
      return measure_error(instantiate(Kc), oracle, req.M, req.m, req.opts);
    };
    BuildOptions so = req.opts;
    so.K_start = std::max(req.opts.K_start, 100.0 * half);
    K = search_scale(measure, req.target_eps, so);
  }
  Network net = instantiate(K);
  double err = measure_error(net, oracle, req.M, req.m, req.opts);
  if (req.target_eps > 0 && err > req.target_eps)
    throw BuildError("build_primitive: measured error above target");
  net.provenance["M"] = req.M;
  net.provenance["m"] = req.m;
  net.provenance["measured_error"] = err;
  net.provenance["activation"] = act.name;
  if (req.target_eps > 0) net.provenance["target_eps"] = req.target_eps;
  {
    std::lock_guard<std::mutex> lk(g_prim_mu);
    g_prim_cache.emplace(key, net);
  }
  return net;
}

namespace {

// select coordinates `rows` of a d-dimensional input as a pure affine network
Network selector_net(int dim, const std::vector<int>& rows) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(int(rows.size()), dim);
  for (size_t i = 0; i < rows.size(); ++i) A(int(i), rows[i]) = 1.0;
  return make_affine(A, Eigen::VectorXd::Zero(int(rows.size())));
}

struct StageKit {
  Network product;        // R^2 -> R, depth 1
  Network identity;       // R -> R, depth 1
  const Network* id_for_padding() const { return &identity; }
};

StageKit make_stage_kit(const Activation& act, double half, int m, double eps,
                        const BuildOptions& opts) {
  StageKit kit;
  BuildRequest r;
  r.activation = act.name;
  r.M = half;
  r.m = m;
  r.target_eps = eps;
  r.opts = opts;
  kit.product = build_primitive(PrimitiveKind::product, r);
  kit.identity = build_primitive(PrimitiveKind::identity, r);
  return kit;
}

// one ladder pass at a fixed per-stage tolerance
Network monomial_ladder(const Activation& act, const std::vector<int>& literals, int dim, double M,
                        int m, double eps0, const BuildOptions& opts) {
  const int n = int(literals.size());
  Padding pad;
  // current maps x to [P_k, pending literal values]
  Network cur = selector_net(dim, literals);
  std::vector<StageKit> kits;
  for (int k = 1; k < n; ++k) {
    double half = std::pow(M, k) + 1.0;
    kits.push_back(make_stage_kit(act, half, m, eps0, opts));
    const StageKit& kit = kits.back();
    pad.identity_prototype = opts.exact_skip ? nullptr : kit.id_for_padding();

    int r = n - k;  // inputs to this stage: [P_k, lit_k, ..., lit_{n-1}]
    std::vector<Network> members;
    members.push_back(affine_pre(kit.product,
                                 selector_net(r + 1, {0, 1}).layers[0].W,
                                 Eigen::VectorXd::Zero(2)));
    for (int j = 2; j <= r; ++j) {
      Network carry = opts.exact_skip ? selector_net(r + 1, {j})
                                      : affine_pre(kit.identity, selector_net(r + 1, {j}).layers[0].W,
                                                   Eigen::VectorXd::Zero(1));
      members.push_back(std::move(carry));
    }
    cur = compose(parallel(members, pad), cur);
  }
  if (n == 1) {
    // a lone literal reduces to the identity block
    StageKit kit = make_stage_kit(act, M, m, eps0, opts);
    cur = compose(kit.identity, cur);
  }
  return select_output(cur, 0);
}

}  // namespace

Network build_monomial(const std::string& activation, const MultiIndex& alpha, int dim, double M,
                       int m, double target_eps, const BuildOptions& opts) {
  const Activation& act = act_ref(activation);
  int total = mi_total(alpha);
  if (total < 1) throw BuildError("build_monomial: |alpha| must be >= 1");
  std::vector<int> literals;
  for (int j = 0; j < dim; ++j)
    for (int r = 0; r < alpha[size_t(j)]; ++r) literals.push_back(j);

  TargetFunction oracle = make_poly_target(dim, {{alpha, 1.0}});
  double eps0 = target_eps / 2.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Network net = monomial_ladder(act, literals, dim, M, m, eps0, opts);
    double err = measure_error(net, oracle, M, m, opts);
    if (err <= target_eps) {
      net.provenance = {{"construction", "monomial"},
                        {"activation", act.name},
                        {"alpha_total", total},
                        {"M", M},
                        {"m", m},
                        {"target_eps", target_eps},
                        {"stage_eps", eps0},
                        {"measured_error", err}};
      int distinct = 0;
      for (int j = 0; j < dim; ++j) distinct += alpha[size_t(j)] > 0 ? 1 : 0;
      (void)distinct;
      assert_budget(net, std::max(20.0, 8.0 * total - 4.0), std::max(1, total - 1),
                    "build_monomial");
      return net;
    }
    eps0 /= 4.0;
  }
  throw BuildError("build_monomial: cascade refinement exhausted");
}

Network build_polynomial(const std::string& activation, const std::map<MultiIndex, double>& coeffs,
                         int dim, double M, int m, double target_eps, const BuildOptions& opts) {
  const Activation& act = act_ref(activation);
  double constant = 0.0;
  std::vector<MultiIndex> alphas;
  std::vector<double> weights;
  int degree = 0;
  for (const auto& [a, c] : coeffs) {
    if (mi_total(a) == 0) {
      constant += c;
      continue;
    }
    if (c == 0.0) continue;
    alphas.push_back(a);
    weights.push_back(c);
    degree = std::max(degree, mi_total(a));
  }
  TargetFunction oracle = make_poly_target(dim, coeffs);
  if (alphas.empty()) {
    Network net = make_affine(Eigen::MatrixXd::Zero(1, dim), Eigen::VectorXd::Constant(1, constant));
    net.set_activation(act);
    net.provenance = {{"construction", "polynomial"}, {"activation", act.name}, {"measured_error", 0.0}};
    return net;
  }

  double wsum = 0.0;
  for (double w : weights) wsum += std::abs(w);
  double eps0 = target_eps / (2.0 * std::max(1.0, wsum));
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<Network> blocks;
    for (const auto& a : alphas) blocks.push_back(build_monomial(activation, a, dim, M, m, eps0, opts));
    Network id_proto;
    Padding pad;
    if (!opts.exact_skip) {
      BuildRequest r;
      r.activation = act.name;
      r.M = std::pow(M, degree) + 1.0;
      r.m = m;
      r.target_eps = eps0;
      r.opts = opts;
      id_proto = build_primitive(PrimitiveKind::identity, r);
      pad.identity_prototype = &id_proto;
    }
    Network net = linear_combination(blocks, weights, pad);
    net.layers.back().b[0] += constant;
    double err = measure_error(net, oracle, M, m, opts);
    if (err <= target_eps) {
      net.provenance = {{"construction", "polynomial"},
                        {"activation", act.name},
                        {"M", M},
                        {"m", m},
                        {"target_eps", target_eps},
                        {"measured_error", err}};
      return net;
    }
    eps0 /= 4.0;
  }
  throw BuildError("build_polynomial: cascade refinement exhausted");
}

Network build_relu_unit(const std::string& activation, double K, double M, ReluUnitMode mode,
                        const BuildOptions& opts, double block_eps) {
  const Activation& act = act_ref(activation);
  if (mode == ReluUnitMode::auto_mode)
    mode = act.decay_target == DecayTarget::sigma_over_x ? ReluUnitMode::sigma_over_x
                                                         : ReluUnitMode::x_times_sigma;
  Network net;
  if (mode == ReluUnitMode::sigma_over_x) {
    // sigma_tilde(Kx)/K is one scaled neuron
    Eigen::MatrixXd W1(1, 1), W2(1, 1);
    W1(0, 0) = K;
    W2(0, 0) = act.norm_beta / K;
    Eigen::VectorXd b2(1);
    b2[0] = act.norm_beta * act.norm_alpha / K;
    net = Network({{W1, Eigen::VectorXd::Zero(1)}, {W2, b2}}, act);
  } else {
    // x * sigma_tilde(Kx): carry x and the scaled neuron into a product block
    BuildRequest r;
    r.activation = act.name;
    r.M = M + 1.0;
    r.m = 1;
    r.target_eps = block_eps;
    r.opts = opts;
    Network prod = build_primitive(PrimitiveKind::product, r);
    Network first;
    if (opts.exact_skip) {
      Eigen::MatrixXd W1(2, 1);
      W1 << 1.0, K;
      Network stem({{W1, Eigen::VectorXd::Zero(2)},
                    {Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)}},
                   act);
      stem.skip_mask[0][0] = 1;  // x passes through
      first = stem;
    } else {
      r.M = M;
      Network idn = build_primitive(PrimitiveKind::identity, r);
      Eigen::MatrixXd sel_x = Eigen::MatrixXd::Identity(1, 1);
      Network xpart = idn;
      Eigen::MatrixXd W1(1, 1);
      W1(0, 0) = K;
      Network neuron({{W1, Eigen::VectorXd::Zero(1)},
                      {Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)}},
                     act);
      first = parallel({xpart, neuron});
    }
    // normalize the neuron output inside the product's input affine
    Eigen::MatrixXd A(2, 2);
    A << 1.0, 0.0, 0.0, act.norm_beta;
    Eigen::VectorXd b(2);
    b << 0.0, act.norm_beta * act.norm_alpha;
    net = compose(affine_pre(prod, A, b), first);
  }
  net.provenance = {{"construction", "relu_unit"},
                    {"activation", act.name},
                    {"K", K},
                    {"M", M},
                    {"mode", mode == ReluUnitMode::sigma_over_x ? "sigma_over_x" : "x_times_sigma"}};
  assert_budget(net, 12, 2, "build_relu_unit");
  return net;
}

Network convert_relu_network(const Network& relu_net, const std::string& activation, double K,
                             std::optional<Box> domain, const BuildOptions& opts, double block_eps) {
  if (relu_net.activation_name() != "relu" && !relu_net.pure_affine())
    throw BuildError("convert_relu_network: source must be a ReLU network");
  const Activation& act = act_ref(activation);

  if (act.decay_target == DecayTarget::sigma_over_x) {
    // same topology: ReLU(z) -> beta (sigma(Kz) + alpha)/K on every neuron row
    Network net = relu_net;
    net.set_activation(act);
    const int L = net.hidden_layers();
    for (int i = 0; i < L; ++i) {
      auto& lay = net.layers[size_t(i)];
      auto& nxt = net.layers[size_t(i) + 1];
      const auto& mask = net.skip_mask[size_t(i)];
      for (int r = 0; r < lay.W.rows(); ++r) {
        if (mask[size_t(r)]) continue;
        lay.W.row(r) *= K;
        lay.b[r] *= K;
        nxt.b += nxt.W.col(r) * (act.norm_beta * act.norm_alpha / K);
        nxt.W.col(r) *= act.norm_beta / K;
      }
    }
    net.provenance = {{"construction", "converted"},
                      {"activation", act.name},
                      {"K", K},
                      {"source", relu_net.provenance}};
    net.input_kinks.clear();
    net.declared_depth = relu_net.declared_depth;
    net.declared_width = relu_net.declared_width;
    return net;
  }

  // S-shaped route: each ReLU becomes (z, sigma_tilde(Kz)) through a product
  // block, doubling depth and widening by the factor-12 block
  if (!domain) throw BuildError("convert_relu_network: S-shaped route needs the evaluation domain");
  // bound pre-activation ranges on a coarse grid
  std::vector<double> range(size_t(relu_net.hidden_layers()), 1.0);
  {
    GridSpec gs;
    gs.per_dim = domain->dim() == 1 ? 257 : 33;
    gs.random_points = 64;
    for (const auto& x : make_grid(*domain, gs)) {
      Eigen::VectorXd h = x;
      for (int i = 0; i < relu_net.hidden_layers(); ++i) {
        Eigen::VectorXd z = relu_net.layers[size_t(i)].W * h + relu_net.layers[size_t(i)].b;
        range[size_t(i)] = std::max(range[size_t(i)], z.cwiseAbs().maxCoeff());
        const auto& mask = relu_net.skip_mask[size_t(i)];
        for (int r = 0; r < z.size(); ++r)
          if (!mask[size_t(r)]) z[r] = std::max(0.0, z[r]);
        h = std::move(z);
      }
    }
  }

  Network cur = make_affine(Eigen::MatrixXd::Identity(relu_net.input_dim(), relu_net.input_dim()),
                            Eigen::VectorXd::Zero(relu_net.input_dim()));
  cur.set_activation(act);
  const int L = relu_net.hidden_layers();
  for (int i = 0; i < L; ++i) {
    const auto& lay = relu_net.layers[size_t(i)];
    const auto& mask = relu_net.skip_mask[size_t(i)];
    const int rows = int(lay.W.rows());

    BuildRequest r;
    r.activation = act.name;
    r.M = range[size_t(i)] * 1.5 + 1.0;
    r.m = 1;
    r.target_eps = block_eps;
    r.opts = opts;
    Network prod = build_primitive(PrimitiveKind::product, r);
    Network idn;
    Padding pad;
    if (!opts.exact_skip) {
      idn = build_primitive(PrimitiveKind::identity, r);
      pad.identity_prototype = &idn;
    }

    std::vector<Network> members;
    for (int rr = 0; rr < rows; ++rr) {
      if (mask[size_t(rr)]) {
        Network carry = opts.exact_skip
                            ? pad_to_depth(selector_net(rows, {rr}), 2, pad)
                            : pad_to_depth(compose(idn, selector_net(rows, {rr})), 2, pad);
        members.push_back(std::move(carry));
        continue;
      }
      // stage A: [z (pass), sigma(K z)]; stage B: product of (z, sigma_tilde)
      Eigen::MatrixXd W1 = Eigen::MatrixXd::Zero(2, rows);
      W1(0, rr) = 1.0;
      W1(1, rr) = K;
      Network stem({{W1, Eigen::VectorXd::Zero(2)},
                    {Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)}},
                   act);
      if (opts.exact_skip) {
        stem.skip_mask[0][0] = 1;
      } else {
        Network zid = affine_pre(idn, selector_net(rows, {rr}).layers[0].W, Eigen::VectorXd::Zero(1));
        Eigen::MatrixXd Wn = Eigen::MatrixXd::Zero(1, rows);
        Wn(0, rr) = K;
        Network neuron({{Wn, Eigen::VectorXd::Zero(1)},
                        {Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)}},
                       act);
        stem = parallel({zid, neuron});
      }
      Eigen::MatrixXd A(2, 2);
      A << 1.0, 0.0, 0.0, act.norm_beta;
      Eigen::VectorXd bb(2);
      bb << 0.0, act.norm_beta * act.norm_alpha;
      members.push_back(compose(affine_pre(prod, A, bb), stem));
    }
    // members consume the pre-activation vector z = W h + b
    Network stage = parallel(members, pad);
    cur = compose(stage, compose(make_affine(lay.W, lay.b), cur));
  }
  Network out = compose(make_affine(relu_net.layers.back().W, relu_net.layers.back().b), cur);
  out.provenance = {{"construction", "converted"},
                    {"activation", act.name},
                    {"K", K},
                    {"source", relu_net.provenance}};
  assert_budget(out, 12.0 * std::max(1, relu_net.declared_width),
                2.0 * std::max(1, relu_net.declared_depth), "convert_relu_network");
  out.declared_depth = 2 * relu_net.declared_depth;
  out.declared_width = 12 * relu_net.declared_width;
  return out;
}

Network build_relu_power(const std::string& activation, int m, double K, double M,
                         const BuildOptions& opts, double block_eps) {
  const Activation& act = act_ref(activation);
  if (m < 1) throw BuildError("build_relu_power: m >= 1 required");
  const bool ratio = act.decay_target == DecayTarget::sigma_over_x;
  const int power = ratio ? m : m + 1;  // number of x factors multiplying the neuron
  const double scale = ratio ? 1.0 / K : 1.0;

  // layer 1 produces [P_0, x] with P_0 = sigma_tilde(Kx) * scale, then `power`
  // product stages multiply by x, dropping the carry after the last one
  BuildRequest r;
  r.activation = act.name;
  r.M = std::pow(std::max(M, 1.0), power) + 2.0;
  r.m = m;
  r.target_eps = block_eps;
  r.opts = opts;
  Network idn;
  Padding pad;
  if (!opts.exact_skip) {
    idn = build_primitive(PrimitiveKind::identity, r);
    pad.identity_prototype = &idn;
  }

  Network cur;
  if (opts.exact_skip) {
    Eigen::MatrixXd W1(2, 1);
    W1 << K, 1.0;
    Network stem({{W1, Eigen::VectorXd::Zero(2)},
                  {Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)}},
                 act);
    stem.skip_mask[0][1] = 1;
    cur = stem;
  } else {
    Eigen::MatrixXd Wn(1, 1);
    Wn(0, 0) = K;
    Network neuron({{Wn, Eigen::VectorXd::Zero(1)},
                    {Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)}},
                   act);
    cur = parallel({neuron, idn});
  }
  {
    Eigen::MatrixXd A(2, 2);
    A << act.norm_beta * scale, 0.0, 0.0, 1.0;
    Eigen::VectorXd b(2);
    b << act.norm_beta * act.norm_alpha * scale, 0.0;
    cur = affine_post(cur, A, b);
  }

  Network prod = build_primitive(PrimitiveKind::product, r);
  for (int k = 1; k <= power; ++k) {
    std::vector<Network> members;
    members.push_back(prod);
    if (k < power) {
      Network carry = opts.exact_skip ? selector_net(2, {1})
                                      : affine_pre(idn, selector_net(2, {1}).layers[0].W,
                                                   Eigen::VectorXd::Zero(1));
      members.push_back(std::move(carry));
    }
    cur = compose(parallel(members, pad), cur);
  }
  cur.provenance = {{"construction", "relu_power"},
                    {"activation", act.name},
                    {"K", K},
                    {"M", M},
                    {"m", m},
                    {"route", ratio ? "x^m * sigma(Kx)/K" : "x^{m+1} * sigma(Kx)"}};
  // the S-shaped route spends one extra layer on the sigma(Kx) neuron
  assert_budget(cur, 20, power + 1, "build_relu_power");
  return cur;
}

Network relu_from_relu_power(int m, double t) {
  if (m < 1) throw BuildError("relu_from_relu_power: m >= 1 required");
  if (t == 0.0) throw BuildError("relu_from_relu_power: t must be nonzero");
  if (m + 1 > 4) throw BuildError("relu_from_relu_power: ReLU^k catalog caps at k = 4");
  const Activation& act = act_ref("relu" + std::to_string(m + 1));
  Eigen::MatrixXd W1 = Eigen::MatrixXd::Ones(m + 1, 1);
  Eigen::VectorXd b1(m + 1);
  Eigen::MatrixXd W2(1, m + 1);
  double scale = 1.0 / (factorial(m + 1) * std::pow(-t, m));
  double binom = 1.0;
  for (int l = 0; l <= m; ++l) {
    b1[l] = l * t;
    W2(0, l) = scale * (l % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * double(m - l) / double(l + 1);
  }
  Network net({{W1, b1}, {W2, Eigen::VectorXd::Zero(1)}}, act);
  net.provenance = {{"construction", "relu_finite_difference"}, {"m", m}, {"t", t}};
  for (int l = 0; l <= m; ++l) net.input_kinks.push_back(-double(l) * t);
  return net;
}

}  // namespace supconv
