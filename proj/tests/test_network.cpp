#include <doctest.h>

#include <random>

#include "supconv/builders.hpp"
#include "supconv/serialize.hpp"

using namespace supconv;

namespace {

Eigen::VectorXd v1(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

Network random_net(std::mt19937& rng, const std::string& act, int din, int width, int depth) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<AffineLayer> layers;
  int prev = din;
  for (int l = 0; l < depth; ++l) {
    AffineLayer lay;
    lay.W = Eigen::MatrixXd::NullaryExpr(width, prev, [&] { return u(rng); });
    lay.b = Eigen::VectorXd::NullaryExpr(width, [&] { return u(rng); });
    layers.push_back(std::move(lay));
    prev = width;
  }
  AffineLayer out;
  out.W = Eigen::MatrixXd::NullaryExpr(1, prev, [&] { return u(rng); });
  out.b = Eigen::VectorXd::NullaryExpr(1, [&] { return u(rng); });
  layers.push_back(std::move(out));
  return Network(std::move(layers), find_activation(act));
}

}  // namespace

TEST_CASE("plain affine and single-neuron evaluation") {
  Network aff = make_scalar_affine(2.0, 1.0);
  CHECK(aff.evaluate1(3.0) == 7.0);

  Eigen::MatrixXd W1(1, 1), W2(1, 1);
  W1 << 1.0;
  W2 << 1.0;
  Network relu1({{W1, Eigen::VectorXd::Zero(1)}, {W2, Eigen::VectorXd::Zero(1)}},
                find_activation("relu"));
  CHECK(relu1.evaluate1(-5.0) == 0.0);
  CHECK(relu1.evaluate1(2.5) == 2.5);
}

TEST_CASE("jets of an affine map") {
  Eigen::MatrixXd W(1, 2);
  W << 2.0, -3.0;
  Eigen::VectorXd b(1);
  b << 0.5;
  Network net = make_affine(W, b);
  Eigen::VectorXd x(2);
  x << 0.3, -0.7;
  Jet j = net.evaluate_jet(x, 2);
  CHECK(j.value() == doctest::Approx(2.0 * 0.3 + 3.0 * 0.7 + 0.5));
  CHECK(j.deriv({1, 0, 0, 0}) == doctest::Approx(2.0));
  CHECK(j.deriv({0, 1, 0, 0}) == doctest::Approx(-3.0));
  CHECK(j.deriv({2, 0, 0, 0}) == doctest::Approx(0.0));
  CHECK(j.deriv({1, 1, 0, 0}) == doctest::Approx(0.0));
}

TEST_CASE("jet order zero equals evaluate") {
  std::mt19937 rng(11);
  for (const char* act : {"gelu", "tanh", "relu"}) {
    Network net = random_net(rng, act, 2, 5, 2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd x(2);
      x << u(rng), u(rng);
      double direct = net.evaluate(x)[0];
      double viajet = net.evaluate_jet(x, 0).value();
      CHECK(viajet == doctest::Approx(direct).epsilon(1e-14));
    }
  }
}

TEST_CASE("jets match central finite differences for smooth nets") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (const char* act : {"gelu", "tanh", "softplus"}) {
    Network net = random_net(rng, act, 1, 4, 2);
    for (int t = 0; t < 10; ++t) {
      double x = u(rng);
      Jet j = net.evaluate_jet1(x, 3);
      const double h = 1e-4;
      auto f = [&](double p) { return net.evaluate1(p); };
      double d1 = (f(x + h) - f(x - h)) / (2 * h);
      double d2 = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
      double d3 = (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
      CHECK(std::abs(j.deriv({1, 0, 0, 0}) - d1) <= 1e-5 * std::max(1.0, std::abs(d1)));
      CHECK(std::abs(j.deriv({2, 0, 0, 0}) - d2) <=
            1e-5 * std::max(1.0, std::abs(d2)) + 1e-16 / (h * h) * 10);
      CHECK(std::abs(j.deriv({3, 0, 0, 0}) - d3) <=
            1e-4 * std::max(1.0, std::abs(d3)) + 1e-15 / (h * h * h));
    }
  }
}

TEST_CASE("relu jets at a kink raise") {
  Eigen::MatrixXd W1(1, 1), W2(1, 1);
  W1 << 1.0;
  W2 << 1.0;
  Network net({{W1, Eigen::VectorXd::Zero(1)}, {W2, Eigen::VectorXd::Zero(1)}},
              find_activation("relu"));
  CHECK_NOTHROW(net.evaluate_jet1(0.0, 0));
  CHECK_THROWS_AS(net.evaluate_jet1(0.0, 1), KinkError);
  CHECK_NOTHROW(net.evaluate_jet1(0.5, 3));
}

TEST_CASE("compose evaluates as pointwise composition") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Network inner = random_net(rng, "tanh", 1, 3, 1);
  Network outer = random_net(rng, "tanh", 1, 4, 1);
  Network both = compose(outer, inner);
  CHECK(both.hidden_layers() == 2);
  for (int t = 0; t < 100; ++t) {
    double x = u(rng);
    CHECK(both.evaluate1(x) ==
          doctest::Approx(outer.evaluate1(inner.evaluate1(x))).epsilon(1e-12));
  }
  Network ident = make_scalar_affine(1.0, 0.0);
  Network same = compose(ident, inner);
  for (int t = 0; t < 20; ++t) {
    double x = u(rng);
    CHECK(same.evaluate1(x) == doctest::Approx(inner.evaluate1(x)).epsilon(1e-14));
  }

  Network gelu_net = random_net(rng, "gelu", 1, 2, 1);
  CHECK_THROWS_AS(compose(gelu_net, inner), std::invalid_argument);
}

TEST_CASE("parallel and linear combinations") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Network a = random_net(rng, "gelu", 1, 4, 1);
  Network b = random_net(rng, "gelu", 1, 4, 2);

  Network par = parallel({a, b});
  CHECK(par.output_dim() == 2);
  CHECK(par.declared_width == a.declared_width + b.declared_width);
  for (int t = 0; t < 100; ++t) {
    double x = u(rng);
    Eigen::VectorXd out = par.evaluate(v1(x));
    CHECK(out[0] == doctest::Approx(a.evaluate1(x)).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(b.evaluate1(x)).epsilon(1e-12));
  }

  Network single = linear_combination({a}, {1.0});
  for (int t = 0; t < 20; ++t) {
    double x = u(rng);
    CHECK(single.evaluate1(x) == doctest::Approx(a.evaluate1(x)).epsilon(1e-12));
  }

  Network zero = linear_combination({a, b}, {0.0, 0.0});
  for (int t = 0; t < 20; ++t) CHECK(zero.evaluate1(u(rng)) == doctest::Approx(0.0));

  Network combo = linear_combination({a, b}, {2.0, -0.5});
  for (int t = 0; t < 100; ++t) {
    double x = u(rng);
    CHECK(combo.evaluate1(x) ==
          doctest::Approx(2.0 * a.evaluate1(x) - 0.5 * b.evaluate1(x)).epsilon(1e-12));
  }
}

TEST_CASE("strict-mode padding routes through identity prototypes") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  BuildRequest req;
  req.activation = "gelu";
  req.M = 3.0;
  req.m = 1;
  req.target_eps = 1e-6;
  Network idn = build_primitive(PrimitiveKind::identity, req);
  Padding pad{&idn};
  Network a = random_net(rng, "gelu", 1, 3, 1);
  Network padded = pad_to_depth(a, 3, pad);
  CHECK(padded.hidden_layers() == 3);
  CHECK(padded.skip_channel_count() == 0);
  for (int t = 0; t < 30; ++t) {
    double x = u(rng);
    CHECK(padded.evaluate1(x) == doctest::Approx(a.evaluate1(x)).epsilon(1e-4));
  }
}

TEST_CASE("serialization round-trips bit-exactly") {
  std::mt19937 rng(31);
  for (int t = 0; t < 20; ++t) {
    Network net = random_net(rng, t % 2 ? "gelu" : "relu", 2, 4, 2);
    net.provenance = {{"construction", "random_test"}};
    std::string text = serialize_network(net);
    Network back = deserialize_network(text);
    REQUIRE(back.layers.size() == net.layers.size());
    for (size_t l = 0; l < net.layers.size(); ++l) {
      CHECK(back.layers[l].W == net.layers[l].W);  // bit-exact
      CHECK(back.layers[l].b == net.layers[l].b);
    }
    CHECK(back.activation_name() == net.activation_name());
    CHECK(serialize_network(back) == text);
  }
}

TEST_CASE("deserialization rejects malformed payloads") {
  std::mt19937 rng(37);
  Network net = random_net(rng, "gelu", 1, 2, 1);
  std::string good = serialize_network(net);

  nlohmann::json j = nlohmann::json::parse(good);
  j["activation"]["name"] = "not_an_activation";
  CHECK_THROWS_AS(deserialize_network(j.dump()), std::invalid_argument);

  j = nlohmann::json::parse(good);
  j["layers"] = nlohmann::json::array();
  CHECK_THROWS_AS(deserialize_network(j.dump()), std::invalid_argument);

  j = nlohmann::json::parse(good);
  std::string wh = j["layers"][0]["weights_hex"].get<std::string>();
  wh.replace(0, 16, "7ff0000000000000");  // +inf
  j["layers"][0]["weights_hex"] = wh;
  CHECK_THROWS_AS(deserialize_network(j.dump()), std::invalid_argument);
}
