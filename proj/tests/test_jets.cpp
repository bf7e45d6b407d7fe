#include <doctest.h>

#include <cmath>
#include <random>

#include "supconv/jet.hpp"
#include "supconv/targets.hpp"

using namespace supconv;

namespace {

Eigen::VectorXd v1(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

Series sin_series(double x, int order) {
  Series s(order);
  for (int k = 0; k <= order; ++k) s.c[size_t(k)] = std::sin(x + k * M_PI / 2.0) / factorial(k);
  return s;
}

Series cos_series(double x, int order) {
  Series s(order);
  for (int k = 0; k <= order; ++k) s.c[size_t(k)] = std::cos(x + k * M_PI / 2.0) / factorial(k);
  return s;
}

}  // namespace

TEST_CASE("coordinate jets") {
  Jet j = jet_variable(v1(3.0), 0, 2);
  CHECK(j.value() == 3.0);
  CHECK(j.coeff({1, 0, 0, 0}) == 1.0);
  CHECK(j.coeff({2, 0, 0, 0}) == 0.0);

  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  Jet j2 = jet_variable(x, 1, 1);
  CHECK(j2.value() == 2.0);
  CHECK(j2.coeff({0, 1, 0, 0}) == 1.0);
  CHECK(j2.coeff({1, 0, 0, 0}) == 0.0);

  Jet j0 = jet_variable(v1(5.0), 0, 0);
  CHECK(j0.value() == 5.0);

  CHECK_THROWS_AS(jet_variable(v1(0.0), 2, 1), std::out_of_range);
}

TEST_CASE("jet multiplication squares the coordinate") {
  Jet x = jet_variable(v1(3.0), 0, 2);
  Jet sq = jet_mul(x, x);
  CHECK(sq.value() == doctest::Approx(9.0));
  CHECK(sq.deriv({1, 0, 0, 0}) == doctest::Approx(6.0));
  CHECK(sq.deriv({2, 0, 0, 0}) == doctest::Approx(2.0));
  CHECK(sq.coeff({2, 0, 0, 0}) == doctest::Approx(1.0));

  Jet one = jet_constant(1.0, 1, 2);
  Jet same = jet_mul(x, one);
  for (size_t i = 0; i < same.coeffs().size(); ++i) CHECK(same.coeffs()[i] == x.coeffs()[i]);
}

TEST_CASE("product of sin and cos jets matches the double-angle identity") {
  const double x0 = 0.7;
  const int order = 4;
  Jet xs = jet_variable(v1(x0), 0, order);
  Jet js = jet_compose_univariate(sin_series(x0, order), xs);
  Jet jc = jet_compose_univariate(cos_series(x0, order), xs);
  Jet prod = jet_mul(js, jc);
  // (1/2) sin(2x): normalized coefficient k is 2^k sin(2x + k pi/2)/(2 k!)
  for (int k = 0; k <= order; ++k) {
    double expect = std::pow(2.0, k) * std::sin(2.0 * x0 + k * M_PI / 2.0) / (2.0 * factorial(k));
    MultiIndex a{std::uint8_t(k), 0, 0, 0};
    CHECK(prod.coeff(a) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("univariate composition") {
  // g(u) = u^2 composed with the coordinate at 3
  Jet x = jet_variable(v1(3.0), 0, 2);
  Series g(2);
  g.c = {9.0, 6.0, 1.0};  // u^2 expanded at u0 = 3
  Jet comp = jet_compose_univariate(g, x);
  CHECK(comp.value() == doctest::Approx(9.0));
  CHECK(comp.deriv({1, 0, 0, 0}) == doctest::Approx(6.0));
  CHECK(comp.deriv({2, 0, 0, 0}) == doctest::Approx(2.0));

  // exp at 0 composed with 2x at 0, order 3 -> {1, 2, 2, 4/3}
  Jet x0 = jet_variable(v1(0.0), 0, 3);
  Jet twox = jet_scale(x0, 2.0);
  Jet e = jet_compose_univariate(series_exp(0.0, 3), twox);
  CHECK(e.coeffs()[0] == doctest::Approx(1.0));
  CHECK(e.coeffs()[1] == doctest::Approx(2.0));
  CHECK(e.coeffs()[2] == doctest::Approx(2.0));
  CHECK(e.coeffs()[3] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  // identity outer series returns the inner jet
  Jet inner = jet_add(jet_mul(x, x), jet_constant(0.5, 1, 2));
  Series id(2);
  id.c = {inner.value(), 1.0, 0.0};
  Jet same = jet_compose_univariate(id, inner);
  for (size_t i = 0; i < same.coeffs().size(); ++i)
    CHECK(same.coeffs()[i] == doctest::Approx(inner.coeffs()[i]).epsilon(1e-14));
}

TEST_CASE("random polynomial products agree with expanded coefficients") {
  std::mt19937 rng(0);
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int d = 1; d <= 3; ++d) {
    for (int trial = 0; trial < 10; ++trial) {
      const int order = 4;
      const auto& set = MultiIndexSet::get(d, 2);
      std::map<MultiIndex, double> pa, pb, prod;
      for (int i = 0; i < set.size(); ++i) {
        pa[set.at(i)] = coef(rng);
        pb[set.at(i)] = coef(rng);
      }
      for (const auto& [a, ca] : pa)
        for (const auto& [b, cb] : pb) {
          MultiIndex s{};
          for (int k = 0; k < kMaxJetDim; ++k)
            s[size_t(k)] = std::uint8_t(a[size_t(k)] + b[size_t(k)]);
          prod[s] += ca * cb;
        }
      TargetFunction fa = make_poly_target(d, pa), fb = make_poly_target(d, pb);
      TargetFunction fp = make_poly_target(d, prod);
      Eigen::VectorXd x(d);
      for (int k = 0; k < d; ++k) x[k] = 0.3 + 0.2 * k;
      Jet jm = jet_mul(fa.jet(x, order), fb.jet(x, order));
      Jet jp = fp.jet(x, order);
      for (size_t i = 0; i < jm.coeffs().size(); ++i)
        CHECK(jm.coeffs()[i] == doctest::Approx(jp.coeffs()[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("composition agrees with central finite differences") {
  for (double x0 : {-0.8, 0.1, 0.6}) {
    const int order = 3;
    auto gf = [](double x) { return std::exp(std::sin(x)); };
    Jet xj = jet_variable(v1(x0), 0, order);
    Jet fj = jet_compose_univariate(sin_series(x0, order), xj);
    Jet gj = jet_compose_univariate(series_exp(fj.value(), order), fj);

    const double h = 1e-4;
    double d1 = (gf(x0 + h) - gf(x0 - h)) / (2 * h);
    double d2 = (gf(x0 + h) - 2 * gf(x0) + gf(x0 - h)) / (h * h);
    double d3 =
        (gf(x0 + 2 * h) - 2 * gf(x0 + h) + 2 * gf(x0 - h) - gf(x0 - 2 * h)) / (2 * h * h * h);
    // the reference itself carries cancellation noise of order eps/h^k
    auto tol = [&](int k, double dk) {
      return 1e-6 * std::max(1.0, std::abs(dk)) + 8e-16 * std::exp(1.0) / std::pow(h, k);
    };
    CHECK(std::abs(gj.deriv({1, 0, 0, 0}) - d1) <= tol(1, d1));
    CHECK(std::abs(gj.deriv({2, 0, 0, 0}) - d2) <= tol(2, d2));
    CHECK(std::abs(gj.deriv({3, 0, 0, 0}) - d3) <= tol(3, d3));
  }
}

TEST_CASE("jet multiplication is associative") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Jet a(2, 3), b(2, 3), c(2, 3);
    for (auto* j : {&a, &b, &c})
      for (auto& v : j->coeffs()) v = u(rng);
    Jet left = jet_mul(jet_mul(a, b), c);
    Jet right = jet_mul(a, jet_mul(b, c));
    for (size_t i = 0; i < left.coeffs().size(); ++i)
      CHECK(left.coeffs()[i] == doctest::Approx(right.coeffs()[i]).epsilon(1e-12));
  }
}

TEST_CASE("order and dimension caps are enforced") {
  CHECK_THROWS(MultiIndexSet::get(5, 2));
  CHECK_THROWS(MultiIndexSet::get(2, 9));
  Jet a(1, 2), b(1, 3);
  CHECK_THROWS_AS(jet_add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(jet_mul(a, b), std::invalid_argument);
}
