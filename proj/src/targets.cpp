#include "supconv/targets.hpp"

#include <cmath>
#include <stdexcept>

namespace supconv {

double TargetFunction::eval1(double x) const {
  Eigen::VectorXd v(1);
  v[0] = x;
  return eval(v);
}

Jet TargetFunction::jet(const Eigen::VectorXd& x, int order) const {
  Jet j(dim, order);
  const auto& set = j.index_set();
  for (int i = 0; i < set.size(); ++i) {
    const MultiIndex& a = set.at(i);
    j.coeffs()[size_t(i)] = deriv(x, a) / mi_factorial(a);
  }
  return j;
}

namespace {

double falling(double v, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (v - i);
  return r;
}

}  // namespace

TargetFunction make_poly_target(int dim, const std::map<MultiIndex, double>& coeffs) {
  TargetFunction t;
  t.name = "poly";
  t.dim = dim;
  t.deriv = [coeffs](const Eigen::VectorXd& x, const MultiIndex& a) {
    double sum = 0.0;
    for (const auto& [beta, c] : coeffs) {
      double term = c;
      for (int j = 0; j < int(x.size()); ++j) {
        int bj = beta[size_t(j)], aj = a[size_t(j)];
        if (aj > bj) {
          term = 0.0;
          break;
        }
        term *= falling(double(bj), aj) * std::pow(x[j], bj - aj);
      }
      sum += term;
    }
    return sum;
  };
  return t;
}

TargetFunction make_target(const std::string& name) {
  TargetFunction t;
  t.name = name;
  if (name == "sin_pi_x") {
    t.dim = 1;
    t.deriv = [](const Eigen::VectorXd& x, const MultiIndex& a) {
      int k = a[0];
      return std::pow(M_PI, k) * std::sin(M_PI * x[0] + k * M_PI / 2.0);
    };
  } else if (name == "exp_x") {
    t.dim = 1;
    t.deriv = [](const Eigen::VectorXd& x, const MultiIndex&) { return std::exp(x[0]); };
  } else if (name == "x2y") {
    t.dim = 2;
    return make_poly_target(2, {{MultiIndex{2, 1, 0, 0}, 1.0}});
  } else if (name == "zero") {
    t.dim = 1;
    t.deriv = [](const Eigen::VectorXd&, const MultiIndex&) { return 0.0; };
  } else if (name.rfind("const:", 0) == 0) {
    double v = std::stod(name.substr(6));
    t.dim = 1;
    t.deriv = [v](const Eigen::VectorXd&, const MultiIndex& a) {
      return mi_total(a) == 0 ? v : 0.0;
    };
  } else {
    throw std::invalid_argument("unknown target: " + name);
  }
  return t;
}

bool target_exists(const std::string& name) {
  try {
    make_target(name);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

}  // namespace supconv
