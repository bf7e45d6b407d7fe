#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "supconv/activation.hpp"
#include "supconv/jet.hpp"

namespace supconv {

struct AffineLayer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

// Immutable feedforward network with one shared activation. Hidden layer i is
// the affine map layers[i] followed by the activation on all rows except the
// ones flagged in skip_mask[i], which pass through unchanged (exact skip
// channels). layers.back() is the output map.
class Network {
 public:
  std::vector<AffineLayer> layers;              // L+1 affine maps
  std::vector<std::vector<std::uint8_t>> skip_mask;  // size L, one flag per row
  nlohmann::json provenance;
  int declared_width = 0;
  int declared_depth = 0;
  std::vector<double> input_kinks;  // registered non-smooth inputs (1-d networks)

  Network() = default;
  Network(std::vector<AffineLayer> ls, const Activation& act);

  const Activation& activation() const;
  const std::string& activation_name() const { return act_.name; }
  void set_activation(const Activation& a) { act_ = a; }
  bool pure_affine() const { return layers.size() == 1; }

  int input_dim() const { return int(layers.front().W.cols()); }
  int output_dim() const { return int(layers.back().W.rows()); }
  int hidden_layers() const { return int(layers.size()) - 1; }
  int max_hidden_width() const;  // neurons plus skip channels
  int skip_channel_count() const;

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
  double evaluate1(double x) const;  // scalar-in scalar-out convenience

  std::vector<Jet> evaluate_jet_outputs(const Eigen::VectorXd& x, int order) const;
  Jet evaluate_jet(const Eigen::VectorXd& x, int order) const;
  Jet evaluate_jet1(double x, int order) const;

  void validate() const;

 private:
  Activation act_;
};

// pure affine map as a degenerate network (activation-neutral in compose)
Network make_affine(const Eigen::MatrixXd& W, const Eigen::VectorXd& b);
Network make_scalar_affine(double w, double b);

// outer(inner(x)) with the interface affine maps fused into one layer
Network compose(const Network& outer, const Network& inner);

// Depth padding policy: with a null prototype, shorter branches grow lossless
// pass-through layers; otherwise each added layer routes every channel
// through a copy of the scalar identity-approximation prototype.
struct Padding {
  const Network* identity_prototype = nullptr;
};

Network pad_to_depth(const Network& net, int depth, const Padding& pad = {});

// same input broadcast to every member, outputs concatenated
Network parallel(const std::vector<Network>& nets, const Padding& pad = {});
// sum_i coeffs[i] * nets[i], outputs must agree in dimension
Network linear_combination(const std::vector<Network>& nets, const std::vector<double>& coeffs,
                           const Padding& pad = {});

Network affine_pre(const Network& net, const Eigen::MatrixXd& A, const Eigen::VectorXd& b);
Network affine_post(const Network& net, const Eigen::MatrixXd& A, const Eigen::VectorXd& b);
Network affine_post1(const Network& net, double a, double b);

// single output row of a multi-output network
Network select_output(const Network& net, int row);

}  // namespace supconv
