#include "supconv/jet.hpp"

#include <cmath>
#include <stdexcept>

namespace supconv {

Jet::Jet(int dim, int order) : dim_(dim), order_(order) {
  c_.assign(size_t(MultiIndexSet::get(dim, order).size()), 0.0);
}

const MultiIndexSet& Jet::index_set() const { return MultiIndexSet::get(dim_, order_); }

double Jet::coeff(const MultiIndex& a) const {
  int p = index_set().position(a);
  if (p < 0) throw std::invalid_argument("Jet::coeff: |alpha| exceeds order");
  return c_[size_t(p)];
}

void Jet::set_coeff(const MultiIndex& a, double v) {
  int p = index_set().position(a);
  if (p < 0) throw std::invalid_argument("Jet::set_coeff: |alpha| exceeds order");
  c_[size_t(p)] = v;
}

double Jet::deriv(const MultiIndex& a) const { return coeff(a) * mi_factorial(a); }

bool Jet::all_finite() const {
  for (double v : c_)
    if (!std::isfinite(v)) return false;
  return true;
}

Jet jet_variable(const Eigen::VectorXd& x, int i, int order) {
  if (i < 0 || i >= x.size()) throw std::out_of_range("jet_variable: coordinate index out of range");
  Jet j(int(x.size()), order);
  j.coeffs()[0] = x[i];
  if (order >= 1) {
    MultiIndex e{0, 0, 0, 0};
    e[size_t(i)] = 1;
    j.set_coeff(e, 1.0);
  }
  return j;
}

Jet jet_constant(double v, int dim, int order) {
  Jet j(dim, order);
  j.coeffs()[0] = v;
  return j;
}

namespace {
void check_match(const Jet& a, const Jet& b, const char* op) {
  if (a.dim() != b.dim() || a.order() != b.order())
    throw std::invalid_argument(std::string(op) + ": dimension or order mismatch");
}
}  // namespace

Jet jet_add(const Jet& a, const Jet& b) {
  check_match(a, b, "jet_add");
  Jet r = a;
  for (size_t i = 0; i < r.coeffs().size(); ++i) r.coeffs()[i] += b.coeffs()[i];
  return r;
}

Jet jet_sub(const Jet& a, const Jet& b) {
  check_match(a, b, "jet_sub");
  Jet r = a;
  for (size_t i = 0; i < r.coeffs().size(); ++i) r.coeffs()[i] -= b.coeffs()[i];
  return r;
}

Jet jet_scale(const Jet& a, double s) {
  Jet r = a;
  for (double& v : r.coeffs()) v *= s;
  return r;
}

Jet jet_mul(const Jet& a, const Jet& b) {
  check_match(a, b, "jet_mul");
  Jet r(a.dim(), a.order());
  const auto& tri = a.index_set().product_triples();
  const double* pa = a.coeffs().data();
  const double* pb = b.coeffs().data();
  double* pr = r.coeffs().data();
  for (const auto& t : tri) pr[t.dst] += pa[t.a] * pb[t.b];
  return r;
}

Jet jet_compose_univariate(const Series& outer, const Jet& inner) {
  if (outer.order() < inner.order())
    throw std::invalid_argument("jet_compose_univariate: outer series shorter than jet order");
  Jet dx = inner;
  dx.coeffs()[0] = 0.0;  // Horner substitution of (inner - u0)
  int n = inner.order();
  Jet acc = jet_constant(outer.c[size_t(n)], inner.dim(), n);
  for (int k = n - 1; k >= 0; --k) {
    acc = jet_mul(acc, dx);
    acc.coeffs()[0] += outer.c[size_t(k)];
  }
  return acc;
}

}  // namespace supconv
