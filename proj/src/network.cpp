#include "supconv/network.hpp"

#include <cmath>
#include <stdexcept>

namespace supconv {

Network::Network(std::vector<AffineLayer> ls, const Activation& act) : layers(std::move(ls)), act_(act) {
  skip_mask.resize(size_t(hidden_layers()));
  for (int i = 0; i < hidden_layers(); ++i)
    skip_mask[size_t(i)].assign(size_t(layers[size_t(i)].W.rows()), 0);
  declared_width = max_hidden_width();
  declared_depth = hidden_layers();
}

const Activation& Network::activation() const { return act_; }

int Network::max_hidden_width() const {
  int w = 0;
  for (int i = 0; i < hidden_layers(); ++i) w = std::max(w, int(layers[size_t(i)].W.rows()));
  return w;
}

int Network::skip_channel_count() const {
  int n = 0;
  for (const auto& m : skip_mask)
    for (auto f : m) n += f ? 1 : 0;
  return n;
}

void Network::validate() const {
  if (layers.empty()) throw std::invalid_argument("Network: empty layer list");
  if (skip_mask.size() != size_t(hidden_layers()))
    throw std::invalid_argument("Network: skip mask size mismatch");
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (!l.W.allFinite() || !l.b.allFinite())
      throw std::invalid_argument("Network: non-finite weight or bias");
    if (l.b.size() != l.W.rows()) throw std::invalid_argument("Network: bias size mismatch");
    if (i + 1 < layers.size() && layers[i + 1].W.cols() != l.W.rows())
      throw std::invalid_argument("Network: layer dimension mismatch");
    if (i < size_t(hidden_layers()) && skip_mask[i].size() != size_t(l.W.rows()))
      throw std::invalid_argument("Network: skip mask row count mismatch");
  }
  if (!pure_affine() && !activation_exists(act_.name))
    throw std::invalid_argument("Network: unknown activation " + act_.name);
}

Eigen::VectorXd Network::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("Network::evaluate: input dimension mismatch");
  Eigen::VectorXd h = x;
  const int L = hidden_layers();
  for (int i = 0; i < L; ++i) {
    Eigen::VectorXd z = layers[size_t(i)].W * h + layers[size_t(i)].b;
    const auto& mask = skip_mask[size_t(i)];
    for (int r = 0; r < z.size(); ++r)
      if (!mask[size_t(r)]) z[r] = act_.eval(z[r]);
    h = std::move(z);
  }
  return layers.back().W * h + layers.back().b;
}

double Network::evaluate1(double x) const {
  Eigen::VectorXd v(1);
  v[0] = x;
  return evaluate(v)[0];
}

std::vector<Jet> Network::evaluate_jet_outputs(const Eigen::VectorXd& x, int order) const {
  if (x.size() != input_dim())
    throw std::invalid_argument("Network::evaluate_jet: input dimension mismatch");
  const int d = int(x.size());
  std::vector<Jet> h;
  h.reserve(size_t(d));
  for (int i = 0; i < d; ++i) h.push_back(jet_variable(x, i, order));

  const int L = hidden_layers();
  const int ncoef = int(h[0].coeffs().size());
  for (int li = 0; li <= L; ++li) {
    const auto& lay = layers[size_t(li)];
    std::vector<Jet> z(size_t(lay.W.rows()), Jet(d, order));
    for (int r = 0; r < lay.W.rows(); ++r) {
      double* dst = z[size_t(r)].coeffs().data();
      dst[0] = lay.b[r];
      for (int c = 0; c < lay.W.cols(); ++c) {
        double w = lay.W(r, c);
        if (w == 0.0) continue;
        const double* src = h[size_t(c)].coeffs().data();
        for (int k = 0; k < ncoef; ++k) dst[k] += w * src[k];
      }
    }
    if (li < L) {
      const auto& mask = skip_mask[size_t(li)];
      for (int r = 0; r < lay.W.rows(); ++r) {
        if (mask[size_t(r)]) continue;
        Series s = act_.series(z[size_t(r)].value(), order);
        z[size_t(r)] = jet_compose_univariate(s, z[size_t(r)]);
      }
    }
    h = std::move(z);
  }
  return h;
}

Jet Network::evaluate_jet(const Eigen::VectorXd& x, int order) const {
  return evaluate_jet_outputs(x, order)[0];
}

Jet Network::evaluate_jet1(double x, int order) const {
  Eigen::VectorXd v(1);
  v[0] = x;
  return evaluate_jet(v, order);
}

Network make_affine(const Eigen::MatrixXd& W, const Eigen::VectorXd& b) {
  Network n;
  n.layers.push_back({W, b});
  n.declared_width = 0;
  n.declared_depth = 0;
  return n;
}

Network make_scalar_affine(double w, double b) {
  Eigen::MatrixXd W(1, 1);
  W(0, 0) = w;
  Eigen::VectorXd bb(1);
  bb[0] = b;
  return make_affine(W, bb);
}

Network compose(const Network& outer, const Network& inner) {
  if (inner.output_dim() != outer.input_dim())
    throw std::invalid_argument("compose: interface dimension mismatch");
  bool inner_affine = inner.pure_affine(), outer_affine = outer.pure_affine();
  if (!inner_affine && !outer_affine && inner.activation_name() != outer.activation_name())
    throw std::invalid_argument("compose: activation mismatch");

  Network r;
  r.set_activation(inner_affine ? outer.activation() : inner.activation());
  r.layers.assign(inner.layers.begin(), inner.layers.end() - 1);
  AffineLayer fused;
  fused.W = outer.layers.front().W * inner.layers.back().W;
  fused.b = outer.layers.front().W * inner.layers.back().b + outer.layers.front().b;
  r.layers.push_back(std::move(fused));
  r.layers.insert(r.layers.end(), outer.layers.begin() + 1, outer.layers.end());
  r.skip_mask = inner.skip_mask;
  r.skip_mask.insert(r.skip_mask.end(), outer.skip_mask.begin(), outer.skip_mask.end());
  r.declared_depth = inner.declared_depth + outer.declared_depth;
  r.declared_width = std::max(inner.declared_width, outer.declared_width);
  r.input_kinks = inner.input_kinks;
  return r;
}

namespace {

// The old output map becomes a hidden layer whose rows all pass through; a
// fresh identity becomes the output map.
Network append_skip_layer(const Network& net) {
  Network r = net;
  int d = net.output_dim();
  r.skip_mask.push_back(std::vector<std::uint8_t>(size_t(d), 1));
  r.layers.push_back({Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)});
  r.declared_depth += 1;
  r.declared_width = std::max(r.declared_width, d);
  return r;
}

}  // namespace

Network pad_to_depth(const Network& net, int depth, const Padding& pad) {
  if (net.hidden_layers() > depth) throw std::invalid_argument("pad_to_depth: already deeper");
  Network r = net;
  while (r.hidden_layers() < depth) {
    if (pad.identity_prototype == nullptr) {
      r = append_skip_layer(r);
    } else {
      std::vector<Network> ids(size_t(r.output_dim()), *pad.identity_prototype);
      r = compose(parallel(ids), r);
    }
  }
  return r;
}

Network parallel(const std::vector<Network>& nets, const Padding& pad) {
  if (nets.empty()) throw std::invalid_argument("parallel: no members");
  const int din = nets.front().input_dim();
  int depth = 0;
  for (const auto& n : nets) {
    if (n.input_dim() != din) throw std::invalid_argument("parallel: input dimension mismatch");
    depth = std::max(depth, n.hidden_layers());
  }
  std::vector<Network> padded;
  padded.reserve(nets.size());
  for (const auto& n : nets) padded.push_back(pad_to_depth(n, depth, pad));

  Network r;
  for (const auto& n : padded)
    if (!n.pure_affine()) {
      r.set_activation(n.activation());
      break;
    }
  if (r.activation_name().empty() && !padded.empty()) r.set_activation(padded.front().activation());
  for (const auto& n : padded)
    if (!n.pure_affine() && n.activation_name() != r.activation_name())
      throw std::invalid_argument("parallel: activation mismatch");

  int wmax = 0, dmax = 0;
  for (int li = 0; li <= depth; ++li) {
    int rows = 0, cols = 0;
    for (const auto& n : padded) {
      rows += int(n.layers[size_t(li)].W.rows());
      cols += li == 0 ? 0 : int(n.layers[size_t(li)].W.cols());
    }
    if (li == 0) cols = din;
    AffineLayer lay;
    lay.W = Eigen::MatrixXd::Zero(rows, cols);
    lay.b = Eigen::VectorXd::Zero(rows);
    std::vector<std::uint8_t> mask(size_t(rows), 0);
    int ro = 0, co = 0;
    for (const auto& n : padded) {
      const auto& l = n.layers[size_t(li)];
      if (li == 0)
        lay.W.block(ro, 0, l.W.rows(), din) = l.W;
      else
        lay.W.block(ro, co, l.W.rows(), l.W.cols()) = l.W;
      lay.b.segment(ro, l.b.size()) = l.b;
      if (li < depth)
        for (int k = 0; k < l.W.rows(); ++k) mask[size_t(ro + k)] = n.skip_mask[size_t(li)][size_t(k)];
      ro += int(l.W.rows());
      co += li == 0 ? 0 : int(l.W.cols());
    }
    r.layers.push_back(std::move(lay));
    if (li < depth) r.skip_mask.push_back(std::move(mask));
  }
  for (const auto& n : padded) {
    wmax += n.declared_width;
    dmax = std::max(dmax, n.declared_depth);
  }
  r.declared_width = wmax;
  r.declared_depth = dmax;
  return r;
}

Network linear_combination(const std::vector<Network>& nets, const std::vector<double>& coeffs,
                           const Padding& pad) {
  if (nets.size() != coeffs.size()) throw std::invalid_argument("linear_combination: size mismatch");
  const int dout = nets.front().output_dim();
  for (const auto& n : nets)
    if (n.output_dim() != dout) throw std::invalid_argument("linear_combination: output dim mismatch");
  Network p = parallel(nets, pad);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dout, p.output_dim());
  for (size_t i = 0; i < nets.size(); ++i)
    A.block(0, int(i) * dout, dout, dout) = coeffs[i] * Eigen::MatrixXd::Identity(dout, dout);
  return affine_post(p, A, Eigen::VectorXd::Zero(dout));
}

Network affine_pre(const Network& net, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() != net.input_dim()) throw std::invalid_argument("affine_pre: dimension mismatch");
  Network r = net;
  r.layers.front().b = net.layers.front().b + net.layers.front().W * b;
  r.layers.front().W = net.layers.front().W * A;
  return r;
}

Network affine_post(const Network& net, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.cols() != net.output_dim()) throw std::invalid_argument("affine_post: dimension mismatch");
  Network r = net;
  r.layers.back().b = A * net.layers.back().b + b;
  r.layers.back().W = A * net.layers.back().W;
  return r;
}

Network affine_post1(const Network& net, double a, double b) {
  Eigen::MatrixXd A(1, 1);
  A(0, 0) = a;
  Eigen::VectorXd bb(1);
  bb[0] = b;
  return affine_post(net, A, bb);
}

Network select_output(const Network& net, int row) {
  if (row < 0 || row >= net.output_dim()) throw std::out_of_range("select_output: bad row");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1, net.output_dim());
  A(0, row) = 1.0;
  return affine_post(net, A, Eigen::VectorXd::Zero(1));
}

}  // namespace supconv
