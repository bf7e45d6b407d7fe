#pragma once

#include <Eigen/Dense>
#include <vector>

#include "supconv/multiindex.hpp"
#include "supconv/series.hpp"

namespace supconv {

// Truncated multivariate Taylor expansion at a point: coefficients are the
// normalized D^alpha f(x)/alpha! over all |alpha| <= order, stored in graded
// lexicographic order. Immutable value type; every operation is pure.
class Jet {
 public:
  Jet(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  double value() const { return c_[0]; }

  double coeff(const MultiIndex& a) const;
  void set_coeff(const MultiIndex& a, double v);
  double deriv(const MultiIndex& a) const;  // D^alpha f = alpha! * coeff

  const std::vector<double>& coeffs() const { return c_; }
  std::vector<double>& coeffs() { return c_; }
  const MultiIndexSet& index_set() const;

  bool all_finite() const;

 private:
  int dim_, order_;
  std::vector<double> c_;
};

// jet of the coordinate function x_i at point x
Jet jet_variable(const Eigen::VectorXd& x, int i, int order);
Jet jet_constant(double v, int dim, int order);

Jet jet_add(const Jet& a, const Jet& b);
Jet jet_sub(const Jet& a, const Jet& b);
Jet jet_scale(const Jet& a, double s);
Jet jet_mul(const Jet& a, const Jet& b);  // truncated Cauchy product (Leibniz rule)

// g o f for univariate outer g: `outer` holds Taylor coefficients of g at
// u0 = inner.value(), with at least inner.order()+1 entries.
Jet jet_compose_univariate(const Series& outer, const Jet& inner);

}  // namespace supconv
