#pragma once

#include <vector>

#include "supconv/series.hpp"

namespace supconv {

// Degree-(2m+1) polynomial S_m on [0,1] with S_m(0)=0, S_m(1)=1, vanishing
// derivatives up to order m at both endpoints, and S_m(x) + S_m(1-x) = 1.
class SmPolynomial {
 public:
  SmPolynomial(int m, std::vector<double> coeffs) : m_(m), c_(std::move(coeffs)) {}

  int m() const { return m_; }
  int degree() const { return int(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }

  double eval(double x) const;
  double deriv(double x, int p) const;
  Series series(double x, int order) const;

 private:
  int m_;
  std::vector<double> c_;  // monomial coefficients, ascending
};

// Solves the (m+1)x(m+1) system for the odd polynomial P_m and maps
// S_m(x) = (P_m(2x-1)+1)/2. Coefficients are computed in exact rational
// arithmetic and rounded once.
SmPolynomial solve_sm(int m);

// re-runs the defining conditions in exact rational arithmetic
bool verify_sm_exact(int m);

}  // namespace supconv
