#include "supconv/localpoly.hpp"

#include <cmath>

namespace supconv {

double averaged_taylor_constant(int n, int d) {
  const auto& set = MultiIndexSet::get(d, n - 1);
  double c = 0.0;
  for (int i = 0; i < set.size(); ++i)
    for (int j = 0; j < set.size(); ++j) {
      MultiIndex sum{};
      int tot = 0;
      for (int k = 0; k < kMaxJetDim; ++k) {
        sum[size_t(k)] = std::uint8_t(set.at(i)[size_t(k)] + set.at(j)[size_t(k)]);
        tot += sum[size_t(k)];
      }
      if (tot <= n - 1) c += 1.0 / (mi_factorial(set.at(i)) * mi_factorial(set.at(j)));
    }
  return c;
}

double AveragedTaylor::eval(const Eigen::VectorXd& x) const {
  double v = 0.0;
  for (const auto& [a, c] : coeffs) {
    double t = c;
    for (int j = 0; j < x.size(); ++j) t *= std::pow(x[j], int(a[size_t(j)]));
    v += t;
  }
  return v;
}

Jet AveragedTaylor::jet(const Eigen::VectorXd& x, int ord) const {
  std::map<MultiIndex, double> cs(coeffs.begin(), coeffs.end());
  return make_poly_target(int(x.size()), cs).jet(x, ord);
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1]
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(size_t(n), 0.0);
  w.assign(size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      double dp = n * (t * p0 - p1) / (t * t - 1.0);
      double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
    }
    double dp = n * (t * p0 - p1) / (t * t - 1.0);
    x[size_t(i)] = t;
    w[size_t(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

double bump_raw(double rho2) {  // rho2 = |y - x0|^2 / r^2
  if (rho2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - rho2));
}

struct Quad {
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> wts;  // bump-weighted, unnormalized
  double mass = 0.0;
};

Quad make_quad(const Eigen::VectorXd& x0, double r, int d, int nodes) {
  std::vector<double> gx, gw;
  gauss_legendre(nodes, gx, gw);
  Quad q;
  Eigen::VectorXd y(d);
  if (d == 1) {
    for (int i = 0; i < nodes; ++i) {
      y[0] = x0[0] + r * gx[size_t(i)];
      double b = bump_raw(gx[size_t(i)] * gx[size_t(i)]);
      if (b == 0.0) continue;
      q.pts.push_back(y);
      q.wts.push_back(gw[size_t(i)] * r * b);
    }
  } else {
    for (int i = 0; i < nodes; ++i)
      for (int j = 0; j < nodes; ++j) {
        double u = gx[size_t(i)], v = gx[size_t(j)];
        double rho2 = u * u + v * v;
        double b = bump_raw(rho2);
        if (b == 0.0) continue;
        y[0] = x0[0] + r * u;
        y[1] = x0[1] + r * v;
        q.pts.push_back(y);
        q.wts.push_back(gw[size_t(i)] * gw[size_t(j)] * r * r * b);
      }
  }
  for (double w : q.wts) q.mass += w;
  return q;
}

}  // namespace

AveragedTaylor averaged_taylor(const TargetFunction& f, const Eigen::VectorXd& x0, double r, int n,
                               int quad_nodes) {
  const int d = int(x0.size());
  if (d < 1 || d > 2) throw std::invalid_argument("averaged_taylor: d <= 2 supported");
  if (n < 1) throw std::invalid_argument("averaged_taylor: n >= 1 required");

  int nodes = quad_nodes;
  Quad q;
  if (nodes <= 0) {
    // double the node count until the bump normalization settles
    int cand = 16;
    double prev_mass = -1.0;
    const int cap = d == 1 ? 512 : 192;
    while (true) {
      q = make_quad(x0, r, d, cand);
      if (prev_mass > 0 && std::abs(q.mass - prev_mass) <= 1e-8 * q.mass) break;
      prev_mass = q.mass;
      if (cand >= cap)
        throw std::runtime_error("averaged_taylor: quadrature normalization did not settle");
      cand *= 2;
    }
    nodes = cand;
  } else {
    q = make_quad(x0, r, d, nodes);
  }

  AveragedTaylor at;
  at.center = x0;
  at.radius = r;
  at.order = n;

  const auto& set = MultiIndexSet::get(d, n - 1);
  std::vector<double> acc(size_t(set.size()), 0.0);
  for (size_t p = 0; p < q.pts.size(); ++p) {
    const Eigen::VectorXd& y = q.pts[p];
    double wn = q.wts[p] / q.mass;
    for (int bi = 0; bi < set.size(); ++bi) {
      const MultiIndex& beta = set.at(bi);
      double df = f.deriv(y, beta) / mi_factorial(beta) * wn;
      // expand prod_j (x_j - y_j)^{beta_j} into monomials x^gamma
      for (int gi = 0; gi < set.size(); ++gi) {
        const MultiIndex& gamma = set.at(gi);
        bool ok = true;
        double coef = 1.0;
        for (int j = 0; j < d; ++j) {
          int bj = beta[size_t(j)], gj = gamma[size_t(j)];
          if (gj > bj) {
            ok = false;
            break;
          }
          double binom = 1.0;
          for (int t = 0; t < gj; ++t) binom = binom * double(bj - t) / double(t + 1);
          coef *= binom * std::pow(-y[j], bj - gj);
        }
        if (ok) acc[size_t(gi)] += df * coef;
      }
    }
  }
  for (int gi = 0; gi < set.size(); ++gi) at.coeffs[set.at(gi)] = acc[size_t(gi)];
  return at;
}

int PiecewisePoly::flat_index(const std::vector<int>& idx) const {
  int flat = 0, stride = 1;
  for (int j = 0; j < d; ++j) {
    flat += idx[size_t(j)] * stride;
    stride *= sizes[size_t(j)];
  }
  return flat;
}

int PiecewisePoly::locate(const Eigen::VectorXd& x) const {
  OmegaGeometry geo(d, J);
  std::vector<int> idx(static_cast<size_t>(d));
  for (int j = 0; j < d; ++j) {
    int i = geo.cell_index_1d(vm[size_t(j)], x[j]);
    if (i < 0) return -1;
    idx[size_t(j)] = i;
  }
  return flat_index(idx);
}

PiecewisePoly local_piecewise(const TargetFunction& f, int J, const VmPattern& vm, int n) {
  const int d = int(vm.size());
  if (f.dim != d) throw std::invalid_argument("local_piecewise: dimension mismatch");
  if (n < std::max(2, 1)) throw std::invalid_argument("local_piecewise: n >= 2 required");
  PiecewisePoly pp;
  pp.J = J;
  pp.n = n;
  pp.d = d;
  pp.vm = vm;
  OmegaGeometry geo(d, J);
  for (int j = 0; j < d; ++j) pp.sizes.push_back(geo.cells_per_dim(vm[size_t(j)]));

  int total = 1;
  for (int s : pp.sizes) total *= s;
  pp.table.resize(size_t(total));

  std::vector<int> idx(static_cast<size_t>(d), 0);
  Eigen::VectorXd center(d);
  const double r = 1.0 / (4.0 * double(J));
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    for (int j = 0; j < d; ++j) {
      idx[size_t(j)] = rem % pp.sizes[size_t(j)];
      rem /= pp.sizes[size_t(j)];
    }
    for (int j = 0; j < d; ++j) {
      auto [lo, hi] = geo.cell_interval_unclipped(vm[size_t(j)], idx[size_t(j)]);
      center[j] = 0.5 * (lo + hi);
    }
    pp.table[size_t(flat)] = averaged_taylor(f, center, r, n).coeffs;
  }
  return pp;
}

Jet eval_piecewise_jet(const PiecewisePoly& p, const Eigen::VectorXd& x, int order) {
  int flat = p.locate(x);
  if (flat < 0) throw std::domain_error("eval_piecewise_jet: x in a cell gap or on a boundary");
  // refuse exact cell boundaries: the table is discontinuous there
  OmegaGeometry geo(p.d, p.J);
  for (int j = 0; j < p.d; ++j) {
    int i = geo.cell_index_1d(p.vm[size_t(j)], x[j]);
    auto [lo, hi] = geo.cell_interval(p.vm[size_t(j)], i);
    bool at_domain_edge = (x[j] == 0.0 && lo == 0.0) || (x[j] == 1.0 && hi == 1.0);
    if ((x[j] == lo || x[j] == hi) && !at_domain_edge)
      throw std::domain_error("eval_piecewise_jet: x on a cell boundary");
  }
  return make_poly_target(p.d, p.cell_coeffs(flat)).jet(x, order);
}

}  // namespace supconv
