#include "supconv/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "supconv/multiindex.hpp"

namespace supconv {

double Series::deriv(int k) const {
  if (k < 0 || k >= int(c.size())) return 0.0;
  return c[size_t(k)] * factorial(k);
}

Series& Series::operator+=(const Series& o) {
  size_t n = std::min(c.size(), o.c.size());
  c.resize(n);
  for (size_t i = 0; i < n; ++i) c[i] += o.c[i];
  return *this;
}

Series& Series::operator-=(const Series& o) {
  size_t n = std::min(c.size(), o.c.size());
  c.resize(n);
  for (size_t i = 0; i < n; ++i) c[i] -= o.c[i];
  return *this;
}

Series& Series::operator*=(double s) {
  for (double& v : c) v *= s;
  return *this;
}

Series operator+(Series a, const Series& b) { return a += b; }
Series operator-(Series a, const Series& b) { return a -= b; }
Series operator*(double s, Series a) { return a *= s; }

Series operator*(const Series& a, const Series& b) {
  size_t n = std::min(a.c.size(), b.c.size());
  Series r(int(n) - 1);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; i + j < n; ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}

Series series_recip(const Series& a) {
  if (a.c.empty() || a.c[0] == 0.0) throw std::domain_error("series_recip: zero constant term");
  Series r(a.order());
  r.c[0] = 1.0 / a.c[0];
  for (size_t k = 1; k < a.c.size(); ++k) {
    double acc = 0.0;
    for (size_t j = 1; j <= k; ++j) acc += (j < a.c.size() ? a.c[j] : 0.0) * r.c[k - j];
    r.c[k] = -acc / a.c[0];
  }
  return r;
}

Series series_div(const Series& a, const Series& b) { return a * series_recip(b); }

Series series_compose(const Series& outer, const Series& inner) {
  Series dx = inner;
  if (!dx.c.empty()) dx.c[0] = 0.0;  // substitute (inner - u0)
  int n = std::min(outer.order(), inner.order());
  Series acc = series_const(outer.c[size_t(n)], n);
  for (int k = n - 1; k >= 0; --k) {
    acc = acc * dx;
    acc.c[0] += outer.c[size_t(k)];
  }
  return acc;
}

Series series_integrate(const Series& d, double value_at_point) {
  Series r(d.order() + 1);
  r.c[0] = value_at_point;
  for (int k = 0; k <= d.order(); ++k) r.c[size_t(k + 1)] = d.c[size_t(k)] / double(k + 1);
  return r;
}

Series series_identity(double x0, int order) {
  Series r(order);
  r.c[0] = x0;
  if (order >= 1) r.c[1] = 1.0;
  return r;
}

Series series_const(double v, int order) {
  Series r(order);
  r.c[0] = v;
  return r;
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Series series_exp(double x, int order) {
  Series r(order);
  double v = std::exp(x);
  for (int k = 0; k <= order; ++k) {
    r.c[size_t(k)] = v;
    v /= double(k + 1);
  }
  return r;
}

// ODE propagation: given y(0) and y' = F(y) with F polynomial in the series
// computed so far, fill coefficients one order at a time.
Series series_sigmoid(double x, int order) {
  Series y(order);
  y.c[0] = stable_sigmoid(x);
  for (int k = 0; k < order; ++k) {
    // k-th coefficient of y*(1-y)
    double conv = 0.0;
    for (int j = 0; j <= k; ++j) conv += y.c[size_t(j)] * ((k - j == 0 ? 1.0 : 0.0) - y.c[size_t(k - j)]);
    y.c[size_t(k + 1)] = conv / double(k + 1);
  }
  return y;
}

Series series_tanh(double x, int order) {
  Series y(order);
  y.c[0] = std::tanh(x);
  for (int k = 0; k < order; ++k) {
    double conv = 0.0;
    for (int j = 0; j <= k; ++j) conv += y.c[size_t(j)] * y.c[size_t(k - j)];
    y.c[size_t(k + 1)] = ((k == 0 ? 1.0 : 0.0) - conv) / double(k + 1);
  }
  return y;
}

Series series_atan(double x, int order) {
  if (order == 0) return {std::atan(x)};
  // derivative 1/(1 + (x+t)^2)
  Series den(order - 1);
  den.c[0] = 1.0 + x * x;
  if (order - 1 >= 1) den.c[1] = 2.0 * x;
  if (order - 1 >= 2) den.c[2] = 1.0;
  return series_integrate(series_recip(den), std::atan(x));
}

Series series_gauss_pdf(double x, int order) {
  Series y(order);
  y.c[0] = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  for (int k = 0; k < order; ++k) {
    // y' = -(x + t) y
    double conv = x * y.c[size_t(k)] + (k >= 1 ? y.c[size_t(k - 1)] : 0.0);
    y.c[size_t(k + 1)] = -conv / double(k + 1);
  }
  return y;
}

Series series_gauss_cdf(double x, int order) {
  double phi = 0.5 * std::erfc(-x / std::sqrt(2.0));
  if (order == 0) return {phi};
  return series_integrate(series_gauss_pdf(x, order - 1), phi);
}

Series series_softplus(double x, int order) {
  if (order == 0) return {stable_softplus(x)};
  return series_integrate(series_sigmoid(x, order - 1), stable_softplus(x));
}

Series series_pow_int(double x, int p, int order) {
  Series r(order);
  // binomial expansion of (x+t)^p, truncated
  double coef = 1.0;  // C(p, k) x^{p-k}
  for (int k = 0; k <= std::min(order, p); ++k) {
    r.c[size_t(k)] = coef * std::pow(x, p - k);
    coef = coef * double(p - k) / double(k + 1);
  }
  return r;
}

}  // namespace supconv
