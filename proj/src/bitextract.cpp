#include "supconv/bitextract.hpp"

#include <cmath>
#include <cstdint>

#include "supconv/builders.hpp"

namespace supconv {

int fit_points_bits(int N, int L, int s) {
  double nl = double(N) * double(L);
  int b = int(std::ceil(2.0 * s * std::log2(std::max(nl, 1.0))));
  return std::min(std::max(b, 1), 52);
}

namespace {

constexpr double kGamma = 0.25;  // gate margin keeping pre-activations off kinks

std::vector<std::uint64_t> quantize(const std::vector<double>& values, int bits) {
  std::vector<std::uint64_t> q(values.size());
  const double scale = std::pow(2.0, bits);
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0))
      throw BuildError("fit_points: value out of [0,1]");
    double r = std::round(values[i] * scale);
    q[i] = std::uint64_t(std::min(r, scale - 1.0));
  }
  return q;
}

Network fit_points_direct(const std::vector<std::uint64_t>& q, int bits) {
  const int T = int(q.size());
  const double scale = std::pow(2.0, -bits);
  Eigen::VectorXd vals(T);
  for (int i = 0; i < T; ++i) vals[i] = double(q[size_t(i)]) * scale;
  if (T == 1) {
    Network net = make_affine(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, vals[0]));
    net.set_activation(find_activation("relu"));
    return net;
  }
  // ramps centered between integers: transitions on (i - 3/4, i - 1/4)
  const int n = 2 * (T - 1);
  Eigen::MatrixXd W1(n, 1);
  Eigen::VectorXd b1(n);
  Eigen::MatrixXd W2(1, n);
  for (int i = 1; i < T; ++i) {
    double jump = vals[i] - vals[i - 1];
    W1(2 * (i - 1), 0) = 1.0;
    b1[2 * (i - 1)] = -(double(i) - 0.75);
    W1(2 * i - 1, 0) = 1.0;
    b1[2 * i - 1] = -(double(i) - 0.25);
    W2(0, 2 * (i - 1)) = 2.0 * jump;
    W2(0, 2 * i - 1) = -2.0 * jump;
  }
  return Network({{W1, b1}, {W2, Eigen::VectorXd::Constant(1, vals[0])}}, find_activation("relu"));
}

// Affine expression over the rows of the previous layer.
struct Expr {
  Eigen::RowVectorXd w;
  double b = 0.0;
  explicit Expr(int cols) : w(Eigen::RowVectorXd::Zero(cols)) {}
};

struct PackedBuilder {
  std::vector<AffineLayer> layers;
  std::vector<std::vector<std::uint8_t>> masks;
  int prev_rows = 1;

  std::vector<Expr> rows;
  std::vector<std::uint8_t> mask;

  Expr expr() const { return Expr(prev_rows); }
  Expr row_of(int r) const {
    Expr e(prev_rows);
    e.w[r] = 1.0;
    return e;
  }
  int add(const Expr& e, bool skip) {
    rows.push_back(e);
    mask.push_back(skip ? 1 : 0);
    return int(rows.size()) - 1;
  }
  void seal() {
    AffineLayer l;
    l.W = Eigen::MatrixXd::Zero(int(rows.size()), prev_rows);
    l.b = Eigen::VectorXd::Zero(int(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
      l.W.row(int(r)) = rows[r].w;
      l.b[int(r)] = rows[r].b;
    }
    layers.push_back(std::move(l));
    masks.push_back(mask);
    prev_rows = int(rows.size());
    rows.clear();
    mask.clear();
  }
};

// staircase neuron pair bookkeeping: value = sum_k 2 (n1_k - n2_k)
struct StairRows {
  std::vector<int> n1, n2;
  Expr sum(const PackedBuilder& pb) const {
    Expr e = pb.expr();
    for (size_t k = 0; k < n1.size(); ++k) {
      e.w[n1[k]] += 2.0;
      e.w[n2[k]] -= 2.0;
    }
    return e;
  }
};

}  // namespace

Network fit_points(const std::vector<double>& values, int N, int L, int s,
                   FitPointsLayout layout) {
  if (values.empty()) throw BuildError("fit_points: no values");
  if (N < 1 || L < 1 || s < 1) throw BuildError("fit_points: N, L, s must be positive");
  const int T = int(values.size());
  const int B = fit_points_bits(N, L, s);
  const auto q = quantize(values, B);

  const double width_budget = 192.0 * s * (N + 1) * std::log2(8.0 * N);
  const double depth_budget = 10.0 * (L + 2) * std::log2(4.0 * L);

  Network net;
  if (layout == FitPointsLayout::direct || T == 1) {
    net = fit_points_direct(q, B);
    net.provenance = {{"construction", "fit_points"},
                      {"layout", "direct"},
                      {"N", N},
                      {"L", L},
                      {"s", s},
                      {"bits", B}};
  } else {
    // chunk plan: selectors of at most 2^6 plateaus; a zero guard bit after
    // every chunk keeps each selector a quarter-unit away from its kinks
    const int cmax = 6;
    std::vector<int> chunks;
    for (int left = B; left > 0; left -= cmax) chunks.push_back(std::min(left, cmax));
    const int stored = B + int(chunks.size());
    const int LQ = std::max(1, std::min(T, 52 / stored));
    const int G = (T + LQ - 1) / LQ;

    // one dyadic weight per group: [c bits | 0] repeated for each value
    std::vector<double> z(size_t(G), 0.0);
    for (int g = 0; g < G; ++g) {
      std::uint64_t num = 0;
      int used = 0;
      for (int j = 0; j < LQ; ++j) {
        std::uint64_t v = size_t(g * LQ + j) < q.size() ? q[size_t(g * LQ + j)] : 0;
        int shift = B;
        for (int c : chunks) {
          shift -= c;
          num = (num << c) | ((v >> shift) & ((std::uint64_t(1) << c) - 1));
          num <<= 1;  // guard
          used += c + 1;
        }
      }
      z[size_t(g)] = double(num) * std::pow(2.0, -used);
    }

    PackedBuilder pb;
    // layer 1: group boundary ramps shared by the index and payload lookups
    StairRows groups;
    for (int g = 1; g < G; ++g) {
      Expr e = pb.expr();
      e.w[0] = 1.0;
      e.b = -(double(g) * LQ - 0.75);
      groups.n1.push_back(pb.add(e, false));
      e.b = -(double(g) * LQ - 0.25);
      groups.n2.push_back(pb.add(e, false));
    }
    Expr ex = pb.expr();
    ex.w[0] = 1.0;
    const int row_x = pb.add(ex, true);
    pb.seal();

    // channels carried by every pipeline layer
    int row_r = -1, row_out = -1, row_t = -1, row_vacc = -1, row_u = -1, row_hat = -1;
    int gate_row = -1;
    StairRows sel;  // selector rows of the layer just sealed
    double sel_consumed = 0.0;

    for (int j = 0; j < LQ; ++j) {
      double consumed = 0.0;
      for (size_t ci = 0; ci < chunks.size(); ++ci) {
        const int c = chunks[ci];
        const double pc = std::pow(2.0, c);

        // t for this selector, as an affine of the previous layer's rows
        Expr t = pb.expr();
        if (j == 0 && ci == 0) {
          // t = 2^c * z(x): payload lookup over the group ramps
          t.b = z[0];
          for (size_t k = 0; k < groups.n1.size(); ++k) {
            double jump = z[k + 1] - z[k];
            t.w[groups.n1[k]] += 2.0 * jump;
            t.w[groups.n2[k]] -= 2.0 * jump;
          }
          t.w *= pc;
          t.b *= pc;
        } else if (ci == 0) {
          t.w[row_u] = pc;
        } else {
          // u = 2 (t_prev - chunk_prev), guard absorbed
          Expr chunk = sel.sum(pb);
          t.w = 2.0 * pc * (pb.row_of(row_t).w - chunk.w);
          t.b = 2.0 * pc * (pb.row_of(row_t).b - chunk.b);
        }

        StairRows ns;
        for (int k = 1; k < int(pc); ++k) {
          Expr e1 = t;
          e1.b += -(double(k) - 0.75);
          ns.n1.push_back(pb.add(e1, false));
          Expr e2 = t;
          e2.b += -(double(k) - 0.25);
          ns.n2.push_back(pb.add(e2, false));
        }
        // carried channels
        Expr er = pb.expr(), eo = pb.expr(), ev = pb.expr();
        if (j == 0 && ci == 0) {
          er.w[row_x] = 1.0;
          Expr qe = groups.sum(pb);
          er.w -= double(LQ) * qe.w;
          er.b -= double(LQ) * qe.b;
          // out = 0, vacc = 0
        } else {
          er = pb.row_of(row_r);
          eo = pb.row_of(row_out);
          if (gate_row >= 0) {
            eo.w[gate_row] += 1.0;
            eo.w[row_hat] -= kGamma;
            gate_row = -1;
          }
          if (ci > 0) {
            ev = pb.row_of(row_vacc);
            Expr chunk = sel.sum(pb);
            double wgt = std::pow(2.0, -consumed);
            ev.w += wgt * chunk.w;
            ev.b += wgt * chunk.b;
          }
        }
        row_r = pb.add(er, true);
        row_out = pb.add(eo, true);
        row_t = pb.add(t, true);
        row_vacc = pb.add(ev, true);
        pb.seal();
        sel = ns;
        consumed += c;
        sel_consumed = consumed;
      }

      // hat layer: v_j finalized, stream advanced past the last guard
      {
        Expr chunk = sel.sum(pb);
        Expr vj = pb.row_of(row_vacc);
        double wgt = std::pow(2.0, -sel_consumed);
        vj.w += wgt * chunk.w;
        vj.b += wgt * chunk.b;
        Expr un = pb.expr();
        un.w = 2.0 * (pb.row_of(row_t).w - chunk.w);
        un.b = 2.0 * (pb.row_of(row_t).b - chunk.b);

        const double offs[4] = {0.75, 0.25, -0.25, -0.75};
        std::vector<int> hrows;
        for (double o : offs) {
          Expr e = pb.row_of(row_r);
          e.b += o - double(j);
          hrows.push_back(pb.add(e, false));
        }
        row_r = pb.add(pb.row_of(row_r), true);
        row_out = pb.add(pb.row_of(row_out), true);
        row_u = pb.add(un, true);
        row_vacc = pb.add(vj, true);
        pb.seal();

        // gate layer
        Expr hat = pb.expr();
        hat.w[hrows[0]] = 2.0;
        hat.w[hrows[1]] = -2.0;
        hat.w[hrows[2]] = -2.0;
        hat.w[hrows[3]] = 2.0;
        Expr gate = pb.row_of(row_vacc);
        gate.b += kGamma - (1.0 + 2.0 * kGamma);
        gate.w += (1.0 + 2.0 * kGamma) * hat.w;
        gate.b += (1.0 + 2.0 * kGamma) * hat.b;
        int g_neuron = pb.add(gate, false);
        int nr = pb.add(pb.row_of(row_r), true);
        int no = pb.add(pb.row_of(row_out), true);
        int nu = pb.add(pb.row_of(row_u), true);
        int nh = pb.add(hat, true);
        pb.seal();
        row_r = nr;
        row_out = no;
        row_u = nu;
        row_hat = nh;
        gate_row = g_neuron;
        sel = StairRows{};
      }
    }

    // clamp to [0, 2]
    {
      Expr of = pb.row_of(row_out);
      of.w[gate_row] += 1.0;
      of.w[row_hat] -= kGamma;
      Expr o1 = of;
      int c1 = pb.add(o1, false);
      Expr o2 = of;
      o2.b -= 2.0;
      int c2 = pb.add(o2, false);
      pb.seal();
      AffineLayer out;
      out.W = Eigen::MatrixXd::Zero(1, pb.prev_rows);
      out.W(0, c1) = 1.0;
      out.W(0, c2) = -1.0;
      out.b = Eigen::VectorXd::Zero(1);
      pb.layers.push_back(out);
    }

    net = Network(std::move(pb.layers), find_activation("relu"));
    net.skip_mask = std::move(pb.masks);
    net.provenance = {{"construction", "fit_points"},
                      {"layout", "packed"},
                      {"N", N},
                      {"L", L},
                      {"s", s},
                      {"bits", B},
                      {"values_per_group", LQ},
                      {"groups", G}};
  }

  net.provenance["bound"] = 2.0 * std::pow(double(N) * double(L), -2.0 * s);
  net.declared_width = net.max_hidden_width();
  net.declared_depth = net.hidden_layers();
  assert_budget(net, width_budget, depth_budget, "fit_points");
  return net;
}

}  // namespace supconv
