#include "supconv/staircase.hpp"

#include <cmath>

#include "supconv/builders.hpp"

namespace supconv {

Network shallow_value_staircase(const Eigen::VectorXd& values, double gap) {
  const int steps = int(values.size());
  if (steps < 1) throw BuildError("shallow_value_staircase: need at least one plateau");
  if (!(gap > 0.0 && gap < 1.0)) throw BuildError("shallow_value_staircase: gap out of range");
  const Activation& relu = find_activation("relu");
  if (steps == 1) {
    Network net = make_affine(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, values[0]));
    net.set_activation(relu);
    return net;
  }
  const int n = 2 * (steps - 1);
  Eigen::MatrixXd W1(n, 1);
  Eigen::VectorXd b1(n);
  Eigen::MatrixXd W2(1, n);
  for (int k = 1; k < steps; ++k) {
    double jump = values[k] - values[k - 1];
    // ramp from k - gap to k
    W1(2 * (k - 1), 0) = 1.0;
    b1[2 * (k - 1)] = -(double(k) - gap);
    W1(2 * k - 1, 0) = 1.0;
    b1[2 * k - 1] = -double(k);
    W2(0, 2 * (k - 1)) = jump / gap;
    W2(0, 2 * k - 1) = -jump / gap;
  }
  Eigen::VectorXd b2 = Eigen::VectorXd::Constant(1, values[0]);
  return Network({{W1, b1}, {W2, b2}}, relu);
}

namespace {

// index-space floor staircase with `steps` plateaus
Network floor_staircase(int steps, double gap) {
  Eigen::VectorXd vals(steps);
  for (int k = 0; k < steps; ++k) vals[k] = double(k);
  return shallow_value_staircase(vals, gap);
}

std::vector<int> plan_factors(int total, int max_factor) {
  std::vector<int> fs;
  int rem = total;
  while (rem > 1) {
    int f = std::min(rem, max_factor);
    if (f < 2) throw BuildError("staircase factor planning failed");
    // keep factors balanced: ceil(rem^(1/stages)) would also do; greedy is fine
    fs.push_back(f);
    rem = (rem + f - 1) / f;
  }
  if (fs.empty()) fs.push_back(1);
  return fs;
}

}  // namespace

Network build_staircase(int J, double delta, int N, int L, int steps, double step_width) {
  if (J < 1) throw BuildError("build_staircase: J >= 1 required");
  if (steps == 0) steps = J;
  if (step_width == 0.0) step_width = 1.0 / double(J);
  if (!(delta > 0.0 && delta <= 1.0 / (3.0 * double(J))))
    throw BuildError("build_staircase: delta outside (0, 1/(3J)]");
  const double width_budget = 48.0 * N + 36.0;
  const double depth_budget = 8.0 * L + 10.0;
  const double gap = delta / step_width;  // in index space

  // Work in index space y = x / step_width. Each stage peels one factor;
  // every transition of every stage lives inside the trailing fine gap.
  const int max_factor = std::max(2, (int(width_budget) - 8) / 2 + 1);
  std::vector<int> factors = plan_factors(steps, max_factor);
  if (double(factors.size()) + 1.0 > depth_budget)
    throw BuildError("build_staircase: J inconsistent with the depth budget");

  // super-step sizes: R_i = number of fine steps per plateau of stage i
  std::vector<int> R(factors.size());
  {
    int acc = 1;
    for (int i = int(factors.size()) - 1; i >= 0; --i) {
      R[size_t(i)] = acc;
      acc *= factors[size_t(i)];
    }
  }

  const Activation& relu = find_activation("relu");
  // state [y, acc]; y is the residual index, acc the accumulated value
  Eigen::MatrixXd init(2, 1);
  init << 1.0 / step_width, 0.0;
  Network cur = make_affine(init, Eigen::VectorXd::Zero(2));
  cur.set_activation(relu);

  for (size_t i = 0; i < factors.size(); ++i) {
    int F = factors[i];
    double Ri = double(R[i]);
    Network stair = floor_staircase(F, gap / Ri);
    // members read [y, acc]: staircase of y/Ri, then affine recombination
    Eigen::MatrixXd sel(1, 2);
    sel << 1.0 / Ri, 0.0;
    Network q = affine_pre(stair, sel, Eigen::VectorXd::Zero(1));
    Eigen::MatrixXd sy(1, 2), sa(1, 2);
    sy << 1.0, 0.0;
    sa << 0.0, 1.0;
    std::vector<Network> members;
    members.push_back(q);                                              // q_i
    members.push_back(make_affine(sy, Eigen::VectorXd::Zero(1)));      // y carry
    members.push_back(make_affine(sa, Eigen::VectorXd::Zero(1)));      // acc carry
    Network stage = parallel(members);                                 // -> [q, y, acc]
    Eigen::MatrixXd post(2, 3);
    post << -Ri, 1.0, 0.0,  // y' = y - Ri q
        Ri, 0.0, 1.0;       // acc' = acc + Ri q
    stage = affine_post(stage, post, Eigen::VectorXd::Zero(2));
    cur = compose(stage, cur);
  }
  Eigen::MatrixXd out(1, 2);
  out << 0.0, 1.0;
  Network net = affine_post(cur, out, Eigen::VectorXd::Zero(1));
  net.provenance = {{"construction", "staircase"},
                    {"J", J},
                    {"steps", steps},
                    {"delta", delta},
                    {"stages", int(factors.size())}};
  for (int k = 1; k < steps; ++k) {
    net.input_kinks.push_back(double(k) * step_width - delta);
    net.input_kinks.push_back(double(k) * step_width);
  }
  assert_budget(net, width_budget, depth_budget, "build_staircase");
  return net;
}

Network build_sawtooth(int folds, int base_teeth, int J) {
  if (folds < 0 || base_teeth < 1 || J < 1) throw BuildError("build_sawtooth: bad parameters");
  const double covered = 2.0 * double(base_teeth) * std::pow(2.0, folds) / double(J);
  if (covered + 1e-12 < 1.0 + 1.0 / double(J))
    throw BuildError("build_sawtooth: fold count inconsistent with J (does not cover [0,1])");
  const Activation& relu = find_activation("relu");

  // base template: base_teeth unit tents on [0, 2*base_teeth] in index space
  const int nb = 2 * base_teeth + 1;
  Eigen::MatrixXd W1(nb, 1);
  Eigen::VectorXd b1(nb);
  Eigen::MatrixXd W2(1, nb);
  for (int k = 0; k < nb; ++k) {
    W1(k, 0) = 1.0;
    b1[k] = -double(k);
    W2(0, k) = (k == 0 || k == nb - 1) ? 1.0 : (k % 2 == 1 ? -2.0 : 2.0);
  }
  Network base({{W1, b1}, {W2, Eigen::VectorXd::Zero(1)}}, relu);

  // reflection folds R_c(v) = c - |v - c|, largest range first
  Network cur = make_scalar_affine(double(J), 0.0);  // index space y = J x
  cur.set_activation(relu);
  for (int i = 0; i < folds; ++i) {
    double c = double(base_teeth) * std::pow(2.0, folds - i);
    Eigen::MatrixXd Wf(2, 1);
    Wf << 1.0, -1.0;
    Eigen::VectorXd bf(2);
    bf << -c, c;
    Eigen::MatrixXd Wo(1, 2);
    Wo << -1.0, -1.0;
    Network fold({{Wf, bf}, {Wo, Eigen::VectorXd::Constant(1, c)}}, relu);
    cur = compose(fold, cur);
  }
  Network net = affine_post1(compose(base, cur), 1.0 / double(J), 0.0);
  net.provenance = {{"construction", "sawtooth"},
                    {"folds", folds},
                    {"base_teeth", base_teeth},
                    {"J", J}};
  for (int k = 0; k <= int(covered * J); ++k) net.input_kinks.push_back(double(k) / double(J));
  assert_budget(net, std::max(2, nb), folds + 1, "build_sawtooth");
  return net;
}

int count_teeth(const Network& net, double lo, double hi, int samples) {
  double cur = net.evaluate1(lo);
  int sign = 0, changes = 0;
  for (int i = 1; i <= samples; ++i) {
    double x = lo + (hi - lo) * double(i) / samples;
    double next = net.evaluate1(x);
    double slope = next - cur;
    int s = slope > 1e-12 * (hi - lo) ? 1 : (slope < -1e-12 * (hi - lo) ? -1 : 0);
    if (s != 0) {
      if (sign > 0 && s < 0) ++changes;  // a peak ends one tooth
      sign = s;
    }
    cur = next;
  }
  return changes;
}

}  // namespace supconv
