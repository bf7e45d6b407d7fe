#include <doctest.h>

#include <random>

#include "supconv/metrics.hpp"

using namespace supconv;

TEST_CASE("sup error of the zero network against sin(pi x)") {
  TargetFunction f = make_target("sin_pi_x");
  Network zero = make_affine(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  SobolevErrorReport rep = sobolev_error(f, zero, box1(0.0, 1.0), 1);
  // sup |f| = 1, sup |f'| = pi; the grid resolves both to one part in 4097
  CHECK(rep.sup_at_order(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(rep.sup_at_order(1) == doctest::Approx(M_PI).epsilon(1e-5));
  CHECK(rep.combined == doctest::Approx(M_PI).epsilon(1e-5));
}

TEST_CASE("self comparison vanishes") {
  TargetFunction f = make_target("sin_pi_x");
  SobolevErrorReport rep = sobolev_error(jets_of(f), jets_of(f), box1(0.0, 1.0), 2);
  CHECK(rep.combined <= 1e-12);
}

TEST_CASE("grid refinement stability on a smooth discrepancy") {
  TargetFunction f = make_target("sin_pi_x");
  Network zero = make_affine(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  GridSpec coarse, fine;
  coarse.per_dim = 2049;
  fine.per_dim = 4097;
  double a = sobolev_error(f, zero, box1(0.0, 1.0), 1, coarse).combined;
  double b = sobolev_error(f, zero, box1(0.0, 1.0), 1, fine).combined;
  CHECK(std::abs(a - b) <= 0.05 * std::max(a, b));
}

TEST_CASE("order fitting") {
  std::vector<double> J{4, 8, 16};
  std::vector<double> e;
  for (double j : J) e.push_back(std::pow(j, -2.0));
  double r2 = 0.0;
  CHECK(fit_order(J, e, &r2) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(r2 == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> c{0.7, 0.7, 0.7};
  CHECK(fit_order(J, c) == doctest::Approx(0.0).epsilon(1e-9));

  std::vector<double> bad{1.0, 0.0, 1.0};
  CHECK_THROWS_AS(fit_order(J, bad), std::domain_error);
  std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(fit_order({1.0, 2.0}, two), std::invalid_argument);
}

TEST_CASE("product inequality with the explicit constant") {
  // f = g = x on [0,1], m = 1: ||x^2||_{W^1} = 2 and 2^1 * 1 * 1 = 2
  TargetFunction x = make_poly_target(1, {{MultiIndex{1, 0, 0, 0}, 1.0}});
  ProductInequalityReport rep = check_product_inequality(jets_of(x), jets_of(x), 1, box1(0.0, 1.0));
  CHECK(rep.holds);
  CHECK(rep.lhs == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(rep.rhs == doctest::Approx(2.0).epsilon(1e-3));

  TargetFunction one = make_target("const:1");
  TargetFunction f = make_target("sin_pi_x");
  ProductInequalityReport rep1 = check_product_inequality(jets_of(one), jets_of(f), 2, box1(0.0, 1.0));
  CHECK(rep1.holds);

  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<MultiIndex, double> ca, cb;
    for (int k = 0; k <= 3; ++k) {
      ca[MultiIndex{std::uint8_t(k), 0, 0, 0}] = u(rng);
      cb[MultiIndex{std::uint8_t(k), 0, 0, 0}] = u(rng);
    }
    TargetFunction fa = make_poly_target(1, ca), fb = make_poly_target(1, cb);
    GridSpec gs;
    gs.per_dim = 257;
    CHECK(check_product_inequality(jets_of(fa), jets_of(fb), 2, box1(0.0, 1.0), gs).holds);
  }
}

TEST_CASE("csv output is deterministic") {
  ConvergenceReport rep;
  rep.param_name = "J";
  rep.param_values = {4, 8, 16};
  TargetFunction f = make_target("sin_pi_x");
  Network zero = make_affine(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  GridSpec gs;
  gs.per_dim = 129;
  for (int i = 0; i < 3; ++i) rep.reports.push_back(sobolev_error(f, zero, box1(0.0, 1.0), 1, gs));
  rep.slope = 0.0;
  rep.r2 = 1.0;
  std::string once = convergence_csv(rep);
  std::string twice = convergence_csv(rep);
  CHECK(once == twice);
  CHECK(once.find("param_name,param_value,alpha,sup_error,combined,slope,r2") == 0);
}

TEST_CASE("kink-avoiding grids skip registered inputs") {
  GridSpec gs;
  gs.per_dim = 17;
  gs.random_points = 0;
  gs.avoid = {0.5};
  gs.avoid_radius = 0.2;
  for (const auto& p : make_grid(box1(0.0, 1.0), gs)) CHECK(std::abs(p[0] - 0.5) > 0.2);
}
