#include "supconv/smoothstep.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>

#include "supconv/multiindex.hpp"

namespace supconv {

namespace {

using Rat = boost::multiprecision::cpp_rational;

// exact monomial coefficients of S_m
std::vector<Rat> solve_sm_exact(int m) {
  if (m < 1 || m > kMaxJetOrder) throw std::invalid_argument("solve_sm: m out of [1,8]");
  const int n = m + 1;
  // unknowns p_k, k = 0..m, for P(x) = sum p_k x^{2k+1}
  // rows: P(1) = 1; P^{(p)}(1) = 0 for p = 1..m
  std::vector<std::vector<Rat>> A(size_t(n), std::vector<Rat>(size_t(n + 1), Rat(0)));
  for (int k = 0; k <= m; ++k) A[0][size_t(k)] = 1;
  A[0][size_t(n)] = 1;
  for (int p = 1; p <= m; ++p) {
    for (int k = 0; k <= m; ++k) {
      int d = 2 * k + 1;
      if (d < p) continue;
      Rat f = 1;
      for (int i = 0; i < p; ++i) f *= (d - i);
      A[size_t(p)][size_t(k)] = f;
    }
    A[size_t(p)][size_t(n)] = 0;
  }
  // exact Gaussian elimination
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (A[size_t(r)][size_t(col)] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) throw std::runtime_error("solve_sm: singular system");
    std::swap(A[size_t(col)], A[size_t(piv)]);
    for (int r = 0; r < n; ++r) {
      if (r == col || A[size_t(r)][size_t(col)] == 0) continue;
      Rat f = A[size_t(r)][size_t(col)] / A[size_t(col)][size_t(col)];
      for (int c = col; c <= n; ++c) A[size_t(r)][size_t(c)] -= f * A[size_t(col)][size_t(c)];
    }
  }
  std::vector<Rat> p(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) p[size_t(k)] = A[size_t(k)][size_t(n)] / A[size_t(k)][size_t(k)];

  // S(x) = (P(2x-1) + 1)/2, expanded exactly
  std::vector<Rat> s(static_cast<size_t>(2 * m + 2), Rat(0));
  for (int k = 0; k <= m; ++k) {
    // (2x-1)^{2k+1} via binomial expansion
    int d = 2 * k + 1;
    Rat binom = 1;
    for (int j = 0; j <= d; ++j) {
      // coefficient of x^j: C(d, j) 2^j (-1)^{d-j}
      Rat term = binom * Rat(boost::multiprecision::cpp_int(1) << j);
      if ((d - j) % 2 == 1) term = -term;
      s[size_t(j)] += p[size_t(k)] * term / 2;
      binom = binom * (d - j) / (j + 1);
    }
  }
  s[0] += Rat(1, 2);
  return s;
}

std::vector<Rat> poly_deriv(const std::vector<Rat>& c) {
  if (c.size() <= 1) return {Rat(0)};
  std::vector<Rat> d(c.size() - 1);
  for (size_t k = 1; k < c.size(); ++k) d[k - 1] = c[k] * int(k);
  return d;
}

Rat poly_eval(const std::vector<Rat>& c, const Rat& x) {
  Rat v = 0;
  for (size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

}  // namespace

double SmPolynomial::eval(double x) const {
  double v = 0.0;
  for (size_t k = c_.size(); k-- > 0;) v = v * x + c_[k];
  return v;
}

double SmPolynomial::deriv(double x, int p) const {
  if (p == 0) return eval(x);
  if (p >= int(c_.size())) return 0.0;
  double v = 0.0;
  for (size_t k = size_t(p); k < c_.size(); ++k) {
    double f = 1.0;
    for (int i = 0; i < p; ++i) f *= double(int(k) - i);
    v += f * c_[k] * std::pow(x, int(k) - p);
  }
  return v;
}

Series SmPolynomial::series(double x, int order) const {
  Series s(order);
  for (int k = 0; k <= order; ++k) s.c[size_t(k)] = deriv(x, k) / factorial(k);
  return s;
}

SmPolynomial solve_sm(int m) {
  auto exact = solve_sm_exact(m);
  std::vector<double> c(exact.size());
  for (size_t k = 0; k < exact.size(); ++k) c[k] = double(exact[k]);
  return SmPolynomial(m, std::move(c));
}

bool verify_sm_exact(int m) {
  auto s = solve_sm_exact(m);
  // S(0) = 0, S(1) = 1
  if (poly_eval(s, Rat(0)) != 0) return false;
  if (poly_eval(s, Rat(1)) != 1) return false;
  // vanishing derivatives at both endpoints
  std::vector<Rat> d = s;
  for (int p = 1; p <= m; ++p) {
    d = poly_deriv(d);
    if (poly_eval(d, Rat(0)) != 0) return false;
    if (poly_eval(d, Rat(1)) != 0) return false;
  }
  // S(x) + S(1-x) = 1 as a polynomial identity: expand S(1-x) exactly
  std::vector<Rat> refl(s.size(), Rat(0));
  for (size_t k = 0; k < s.size(); ++k) {
    // (1-x)^k
    Rat binom = 1;
    for (size_t j = 0; j <= k; ++j) {
      Rat term = binom;
      if (j % 2 == 1) term = -term;
      refl[j] += s[k] * term;
      binom = binom * int(k - j) / int(j + 1);
    }
  }
  for (size_t k = 0; k < s.size(); ++k) {
    Rat expect = k == 0 ? Rat(1) : Rat(0);
    if (s[k] + refl[k] != expect) return false;
  }
  return true;
}

}  // namespace supconv
