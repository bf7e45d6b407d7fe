#pragma once

#include <functional>
#include <map>
#include <string>

#include "supconv/jet.hpp"

namespace supconv {

// Closed-form target with an exact derivative oracle: deriv(x, alpha) returns
// D^alpha f(x) for any multi-index within the supported order.
struct TargetFunction {
  std::string name;
  int dim = 1;
  int max_order = kMaxJetOrder;
  std::function<double(const Eigen::VectorXd&, const MultiIndex&)> deriv;

  double eval(const Eigen::VectorXd& x) const { return deriv(x, MultiIndex{0, 0, 0, 0}); }
  double eval1(double x) const;
  Jet jet(const Eigen::VectorXd& x, int order) const;
};

// catalog names: sin_pi_x, exp_x, x2y, zero, const:<v>
TargetFunction make_target(const std::string& name);
bool target_exists(const std::string& name);

// polynomial sum c_alpha x^alpha from a coefficient table
TargetFunction make_poly_target(int dim, const std::map<MultiIndex, double>& coeffs);

}  // namespace supconv
