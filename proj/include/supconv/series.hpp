#pragma once

#include <vector>

namespace supconv {

// Truncated univariate Taylor series: c[k] = f^{(k)}(x0)/k!, the expansion
// point itself is kept by the caller. All operations truncate at the shorter
// length unless noted.
struct Series {
  std::vector<double> c;

  Series() = default;
  explicit Series(int n) : c(size_t(n + 1), 0.0) {}
  Series(std::initializer_list<double> v) : c(v) {}

  int order() const { return int(c.size()) - 1; }
  double value() const { return c.empty() ? 0.0 : c[0]; }
  double deriv(int k) const;  // k-th raw derivative, k! * c[k]

  Series& operator+=(const Series& o);
  Series& operator-=(const Series& o);
  Series& operator*=(double s);
};

Series operator+(Series a, const Series& b);
Series operator-(Series a, const Series& b);
Series operator*(const Series& a, const Series& b);  // truncated Cauchy product
Series operator*(double s, Series a);

// 1/a, requires a.c[0] != 0
Series series_recip(const Series& a);
Series series_div(const Series& a, const Series& b);

// g(f(x0+t)) where `outer` is the series of g at u0 = f(x0) and inner.c[0] == u0.
// Horner substitution of (inner - u0).
Series series_compose(const Series& outer, const Series& inner);

// antiderivative with given constant term; result has same length
Series series_integrate(const Series& d, double value_at_point);

// series of (x0 + t), i.e. the identity map at x0
Series series_identity(double x0, int order);
Series series_const(double v, int order);

// analytic building blocks, expanded at x
Series series_exp(double x, int order);               // e^x
Series series_sigmoid(double x, int order);           // logistic, via y' = y(1-y)
Series series_tanh(double x, int order);              // via y' = 1 - y^2
Series series_atan(double x, int order);
Series series_gauss_pdf(double x, int order);         // e^{-x^2/2}/sqrt(2 pi), via y' = -x y
Series series_gauss_cdf(double x, int order);         // Phi
Series series_softplus(double x, int order);          // ln(1+e^x)
Series series_pow_int(double x, int p, int order);    // (x+t)^p

double stable_sigmoid(double x);
double stable_softplus(double x);

}  // namespace supconv
