#pragma once

#include <map>
#include <optional>

#include "supconv/activation.hpp"
#include "supconv/metrics.hpp"
#include "supconv/network.hpp"

namespace supconv {

struct BuildError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BuildOptions {
  bool exact_skip = true;  // lossless pass-through; false routes carries through Id subnets
  double K_max = 1e12;
  double K_start = 100.0;
  int search_per_dim = 1025;  // internal K-search measurement grid (1-d)
  int search_per_dim_2d = 129;
  int search_random = 64;
};

// Request for a closed-form weight construction: either an error target
// (K searched by doubling) or an explicit scale parameter.
struct BuildRequest {
  std::string activation;
  double M = 1.0;           // domain half-width
  int m = 1;                // derivative order of the error norm
  double target_eps = 0.0;  // > 0 selects eps mode
  double K = 0.0;           // > 0 selects explicit-scale mode
  BuildOptions opts;
};

enum class PrimitiveKind { square, product, identity };

// depth-1 blocks: x^2 (width <= 8), xy by polarization (width <= 12),
// x by the second-difference operator (width <= 8 per square copy, 16 total)
Network build_primitive(PrimitiveKind kind, const BuildRequest& req);

// x^alpha as a ladder of product/identity stages
Network build_monomial(const std::string& activation, const MultiIndex& alpha, int dim, double M,
                       int m, double target_eps, const BuildOptions& opts = {});

// sum of monomial blocks matching the polynomial error contract
Network build_polynomial(const std::string& activation, const std::map<MultiIndex, double>& coeffs,
                         int dim, double M, int m, double target_eps, const BuildOptions& opts = {});

enum class ReluUnitMode { auto_mode, sigma_over_x, x_times_sigma };

// psi_K ReLU surrogate: sigma_tilde(Kx)/K for ratio-type activations, or the
// product x * sigma_tilde(Kx) realized with a product block
Network build_relu_unit(const std::string& activation, double K, double M,
                        ReluUnitMode mode = ReluUnitMode::auto_mode, const BuildOptions& opts = {},
                        double block_eps = 1e-7);

// Replace every ReLU neuron of `relu_net` by a psi_K block. The S-shaped route
// needs the evaluation domain to bound pre-activation ranges.
Network convert_relu_network(const Network& relu_net, const std::string& activation, double K,
                             std::optional<Box> domain = std::nullopt,
                             const BuildOptions& opts = {}, double block_eps = 1e-7);

// ReLU^{m+1} surrogate psi_{K,m}: x^m sigma_tilde(Kx)/K or x^{m+1} sigma_tilde(Kx)
Network build_relu_power(const std::string& activation, int m, double K, double M,
                         const BuildOptions& opts = {}, double block_eps = 1e-7);

// exact finite-difference representation of ReLU by shifted ReLU^{m+1} neurons
Network relu_from_relu_power(int m, double t);

// declared budget check; throws BuildError on violation
void assert_budget(const Network& net, double width_budget, double depth_budget,
                   const std::string& what);

// internal K-search: doubles K until measure(K) <= eps or K exceeds opts.K_max;
// returns the first passing K, keeping the best attempt in *best_err
double search_scale(const std::function<double(double)>& measure, double eps,
                    const BuildOptions& opts);

}  // namespace supconv
