#include <doctest.h>

#include <cmath>
#include <random>

#include "supconv/audit.hpp"

using namespace supconv;

TEST_CASE("catalog classifications") {
  const Activation& gelu = find_activation("gelu");
  CHECK(gelu.shape_class == ShapeClass::relu_shaped);
  CHECK(gelu.decay_target == DecayTarget::sigma_over_x);
  CHECK(gelu.smoothness_order == kSmoothnessInf);

  const Activation& softsign = find_activation("softsign");
  CHECK(softsign.smoothness_order == 2);

  const Activation& hardtanh = find_activation("hardtanh");
  CHECK(hardtanh.shape_class == ShapeClass::piecewise_linear);
  CHECK(hardtanh.smoothness_order == 1);

  for (const auto& a : activation_catalog())
    if (a.shape_class == ShapeClass::piecewise_linear) CHECK(a.smoothness_order <= 1);

  CHECK_THROWS_AS(find_activation("swishish"), std::invalid_argument);
}

TEST_CASE("hand-computed series values") {
  // sigmoid at 0: {1/2, 1/4, 0}
  Series s = find_activation("sigmoid").series(0.0, 2);
  CHECK(s.c[0] == doctest::Approx(0.5));
  CHECK(s.c[1] == doctest::Approx(0.25));
  CHECK(s.c[2] == doctest::Approx(0.0));

  // gelu at 0: {0, 1/2, 1/sqrt(2 pi)} as normalized coefficients
  Series g = find_activation("gelu").series(0.0, 2);
  CHECK(g.c[0] == doctest::Approx(0.0));
  CHECK(g.c[1] == doctest::Approx(0.5));
  CHECK(g.c[2] == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));

  // relu at -1 vanishes identically
  Series r = find_activation("relu").series(-1.0, 3);
  for (double c : r.c) CHECK(c == 0.0);
}

TEST_CASE("series order zero matches eval everywhere sampled") {
  for (const auto& a : activation_catalog()) {
    for (int i = 0; i <= 40; ++i) {
      double x = -3.0 + 6.0 * (double(i) + 0.5) / 41.0;
      CHECK(a.series(x, 0).c[0] == doctest::Approx(a.eval(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("series derivatives agree with finite differences of lower orders") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& a : activation_catalog()) {
    if (a.smoothness_order < 4 + 1) continue;  // smooth entries only
    for (int trial = 0; trial < 100; ++trial) {
      double x = u(rng);
      const double h = 1e-4;
      for (int k = 1; k <= 4; ++k) {
        double lo = a.series(x - h, k - 1).deriv(k - 1);
        double hi = a.series(x + h, k - 1).deriv(k - 1);
        double fd = (hi - lo) / (2.0 * h);
        double exact = a.series(x, k).deriv(k);
        double scale = std::max({1.0, std::abs(exact)});
        CHECK(std::abs(fd - exact) <= 1e-5 * scale + 1e-11 / h);
      }
    }
  }
}

TEST_CASE("kink refusal") {
  CHECK_THROWS_AS(find_activation("relu").series(0.0, 1), KinkError);
  CHECK_THROWS_AS(find_activation("softsign").series(0.0, 2), KinkError);
  CHECK_NOTHROW(find_activation("softsign").series(0.0, 1));
  CHECK_THROWS_AS(find_activation("relu2").series(0.0, 2), KinkError);
  CHECK_NOTHROW(find_activation("relu2").series(0.0, 1));
  CHECK_THROWS_AS(find_activation("elu").series(0.0, 2), KinkError);
  CHECK_NOTHROW(find_activation("elu").series(0.0, 1));
  CHECK_THROWS_AS(find_activation("hardtanh").series(1.0, 1), KinkError);
}

TEST_CASE("condition 2 witnesses") {
  ConditionReport g = check_condition2(find_activation("gelu"), -2.0, 2.0);
  CHECK(g.passed);
  CHECK(g.witness_a == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g.second_derivative == doctest::Approx(2.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-9));

  ConditionReport h = check_condition2(find_activation("hardtanh"), -2.0, 2.0);
  CHECK_FALSE(h.passed);

  ConditionReport s = check_condition2(find_activation("sigmoid"), -2.0, 2.0);
  CHECK(s.passed);
  CHECK(std::abs(s.witness_a) > 0.1);  // sigma''(0) = 0, witness away from 0
}

TEST_CASE("condition 1 audits per Table-1 classification") {
  // bottom row: fully smooth entries pass at m = 3
  for (const char* name :
       {"sigmoid", "tanh", "arctan", "dsilu", "srs", "softplus", "silu", "mish", "gelu"}) {
    ConditionReport rep = check_condition1(find_activation(name), 3);
    CHECK_MESSAGE(rep.passed, std::string(name));
  }
  // limited-smoothness rows pass at their order
  for (const char* name : {"softsign", "celu", "elu", "selu_alpha1"}) {
    ConditionReport rep = check_condition1(find_activation(name), 2);
    CHECK_MESSAGE(rep.passed, std::string(name));
  }
  for (const char* name : {"relu", "hardtanh", "hardsigmoid", "elu_alpha2", "selu"}) {
    ConditionReport rep = check_condition1(find_activation(name), 1);
    CHECK_MESSAGE(rep.passed, std::string(name));
  }
  // leaky_relu keeps a constant tail offset; no affine normalization fixes it
  CHECK_FALSE(check_condition1(find_activation("leaky_relu"), 1).passed);
  // ReLU^k grows superlinearly; the ratio candidate cannot quasi-decay
  CHECK_FALSE(check_condition1(find_activation("relu2"), 1).passed);

  // order above smoothness is refused
  CHECK_THROWS_AS(check_condition1(find_activation("softsign"), 3), std::invalid_argument);
}

TEST_CASE("arctan tails decay at exactly the polynomial order") {
  ConditionReport rep = check_condition1(find_activation("arctan"), 3);
  CHECK(rep.passed);
  for (const auto& f : rep.fits) {
    CHECK(f.exponent_pos == doctest::Approx(-(f.k + 1.0)).epsilon(0.05));
    CHECK(f.exponent_neg == doctest::Approx(-(f.k + 1.0)).epsilon(0.05));
  }
}

TEST_CASE("audits are affine invariant") {
  for (const char* name : {"gelu", "tanh", "softsign", "hardtanh"}) {
    const Activation& base = find_activation(name);
    Activation variant = base.affine_variant(2.0, 1.0);
    int m = std::min(3, base.smoothness_order);
    CHECK(check_condition2(base, -2.0, 2.0).passed == check_condition2(variant, -2.0, 2.0).passed);
    CHECK(check_condition1(base, m).passed == check_condition1(variant, m).passed);
  }
}

TEST_CASE("srs parameters satisfy the smoothness constraint") {
  const Activation& srs = find_activation("srs");
  double alpha = srs.params.at("alpha"), beta = srs.params.at("beta");
  CHECK(beta < alpha * std::exp(1.0));
  // denominator never vanishes, so the function is finite on a wide range
  for (double x = -50.0; x <= 50.0; x += 0.5) CHECK(std::isfinite(srs.eval(x)));
}
