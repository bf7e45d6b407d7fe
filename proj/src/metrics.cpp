#include "supconv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace supconv {

Box box1(double lo, double hi) {
  Box b;
  b.lo.resize(1);
  b.hi.resize(1);
  b.lo[0] = lo;
  b.hi[0] = hi;
  return b;
}

Box box2(double xlo, double xhi, double ylo, double yhi) {
  Box b;
  b.lo.resize(2);
  b.hi.resize(2);
  b.lo << xlo, ylo;
  b.hi << xhi, yhi;
  return b;
}

int worker_count() {
  if (const char* env = std::getenv("SUPCONV_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return int(std::min(hc == 0 ? 1u : hc, 8u));
}

std::vector<Eigen::VectorXd> make_grid(const Box& box, const GridSpec& spec) {
  const int d = box.dim();
  if (d < 1 || d > 2) throw std::invalid_argument("make_grid: sup measurement supports d <= 2");
  int n = spec.per_dim > 0 ? spec.per_dim : (d == 1 ? 4097 : 257);

  auto blocked = [&](const Eigen::VectorXd& p) {
    for (double a : spec.avoid)
      for (int j = 0; j < d; ++j)
        if (std::abs(p[j] - a) <= spec.avoid_radius) return true;
    return false;
  };

  std::vector<Eigen::VectorXd> pts;
  Eigen::VectorXd p(d);
  if (d == 1) {
    pts.reserve(size_t(n) + size_t(spec.random_points));
    for (int i = 0; i < n; ++i) {
      p[0] = box.lo[0] + (box.hi[0] - box.lo[0]) * (double(i) + 0.5) / double(n);
      if (!blocked(p)) pts.push_back(p);
    }
  } else {
    pts.reserve(size_t(n) * size_t(n) + size_t(spec.random_points));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        p[0] = box.lo[0] + (box.hi[0] - box.lo[0]) * (double(i) + 0.5) / double(n);
        p[1] = box.lo[1] + (box.hi[1] - box.lo[1]) * (double(j) + 0.5) / double(n);
        if (!blocked(p)) pts.push_back(p);
      }
  }
  // Kronecker low-discrepancy extras; deterministic for a fixed seed
  const double g1 = 0.6180339887498949, g2 = 0.7548776662466927;
  double u = 0.5 + double(spec.seed) * 0.1234567;
  double v = 0.5 + double(spec.seed) * 0.7654321;
  for (int i = 0; i < spec.random_points; ++i) {
    u = std::fmod(u + g1, 1.0);
    v = std::fmod(v + g2, 1.0);
    p[0] = box.lo[0] + (box.hi[0] - box.lo[0]) * u;
    if (d == 2) p[1] = box.lo[1] + (box.hi[1] - box.lo[1]) * v;
    if (!blocked(p)) pts.push_back(p);
  }
  return pts;
}

JetFn jets_of(const Network& net) {
  return [&net](const Eigen::VectorXd& x, int order) { return net.evaluate_jet(x, order); };
}

JetFn jets_of(const TargetFunction& f) {
  return [&f](const Eigen::VectorXd& x, int order) { return f.jet(x, order); };
}

double SobolevErrorReport::sup_at_order(int k) const {
  double s = 0.0;
  for (const auto& e : entries)
    if (mi_total(e.alpha) == k) s = std::max(s, e.sup);
  return s;
}

nlohmann::json SobolevErrorReport::to_json() const {
  nlohmann::json j;
  j["m"] = m;
  j["combined"] = combined;
  j["grid_spec"] = grid_spec;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    std::ostringstream a;
    a << "(";
    for (int k = 0; k < kMaxJetDim; ++k) {
      if (k) a << ",";
      a << int(e.alpha[size_t(k)]);
    }
    a << ")";
    arr.push_back({{"alpha", a.str()}, {"sup", e.sup}});
  }
  j["per_alpha"] = arr;
  return j;
}

namespace {

// partition `pts` across workers, combine per-entry maxima
SobolevErrorReport measure(const JetFn& f, const JetFn& g, int d, int m,
                           const std::vector<Eigen::VectorXd>& pts, const std::string& gridspec) {
  const auto& set = MultiIndexSet::get(d, m);
  SobolevErrorReport rep;
  rep.m = m;
  rep.grid_spec = gridspec;
  rep.entries.resize(size_t(set.size()));
  for (int i = 0; i < set.size(); ++i) rep.entries[size_t(i)].alpha = set.at(i);

  const int workers = std::max(1, std::min<int>(worker_count(), int(pts.size())));
  std::vector<std::vector<double>> sups(size_t(workers), std::vector<double>(size_t(set.size()), 0.0));
  std::vector<std::exception_ptr> errs(static_cast<size_t>(workers));

  auto run = [&](int w) {
    try {
      for (size_t i = size_t(w); i < pts.size(); i += size_t(workers)) {
        Jet jf = f(pts[i], m);
        Jet jg = g(pts[i], m);
        for (int k = 0; k < set.size(); ++k) {
          double df = jf.deriv(set.at(k)), dg = jg.deriv(set.at(k));
          sups[size_t(w)][size_t(k)] = std::max(sups[size_t(w)][size_t(k)], std::abs(df - dg));
        }
      }
    } catch (...) {
      errs[size_t(w)] = std::current_exception();
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> ts;
    for (int w = 0; w < workers; ++w) ts.emplace_back(run, w);
    for (auto& t : ts) t.join();
  }
  for (const auto& e : errs)
    if (e) std::rethrow_exception(e);

  for (int k = 0; k < set.size(); ++k) {
    double s = 0.0;
    for (int w = 0; w < workers; ++w) s = std::max(s, sups[size_t(w)][size_t(k)]);
    rep.entries[size_t(k)].sup = s;
    rep.combined = std::max(rep.combined, s);
  }
  return rep;
}

std::string describe(const Box& box, const GridSpec& spec, size_t npts) {
  std::ostringstream os;
  os << "uniform+lowdisc " << npts << " pts, d=" << box.dim();
  return os.str();
}

}  // namespace

SobolevErrorReport sobolev_error(const JetFn& f, const JetFn& g, const Box& domain, int m,
                                 const GridSpec& spec) {
  auto pts = make_grid(domain, spec);
  return measure(f, g, domain.dim(), m, pts, describe(domain, spec, pts.size()));
}

SobolevErrorReport sobolev_error(const TargetFunction& f, const Network& net, const Box& domain,
                                 int m, const GridSpec& spec) {
  GridSpec s = spec;
  for (double k : net.input_kinks) s.avoid.push_back(k);
  return sobolev_error(jets_of(f), jets_of(net), domain, m, s);
}

SobolevErrorReport sobolev_error_union(const JetFn& f, const JetFn& g, const std::vector<Box>& parts,
                                       int m, const GridSpec& spec) {
  if (parts.empty()) throw std::invalid_argument("sobolev_error_union: no parts");
  std::vector<Eigen::VectorXd> pts;
  for (const auto& b : parts) {
    auto p = make_grid(b, spec);
    pts.insert(pts.end(), p.begin(), p.end());
  }
  return measure(f, g, parts.front().dim(), m, pts, describe(parts.front(), spec, pts.size()));
}

double sobolev_norm(const JetFn& f, const Box& domain, int m, const GridSpec& spec) {
  JetFn zero = [&domain](const Eigen::VectorXd&, int order) {
    return jet_constant(0.0, domain.dim(), order);
  };
  return sobolev_error(f, zero, domain, m, spec).combined;
}

double fit_order(const std::vector<double>& params, const std::vector<double>& errors, double* r2) {
  if (params.size() != errors.size() || params.size() < 3)
    throw std::invalid_argument("fit_order: need at least 3 sweep points");
  for (double e : errors)
    if (!(e > 0.0)) throw std::domain_error("fit_order: nonpositive error present");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = int(params.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(params[size_t(i)]), ly = std::log(errors[size_t(i)]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (r2) {
    double num = n * sxy - sx * sy;
    double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    double corr = den == 0.0 ? 1.0 : num / den;
    *r2 = corr * corr;
  }
  return slope;
}

void fit_report(ConvergenceReport& rep) {
  std::vector<double> errs;
  for (const auto& r : rep.reports) errs.push_back(r.combined);
  rep.slope = fit_order(rep.param_values, errs, &rep.r2);
}

namespace {
std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace

std::string convergence_csv(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << "param_name,param_value,alpha,sup_error,combined,slope,r2\n";
  for (size_t i = 0; i < rep.param_values.size(); ++i) {
    for (const auto& e : rep.reports[i].entries) {
      std::ostringstream a;
      a << "(";
      for (int k = 0; k < kMaxJetDim; ++k) {
        if (k) a << ";";
        a << int(e.alpha[size_t(k)]);
      }
      a << ")";
      os << rep.param_name << "," << num(rep.param_values[i]) << "," << a.str() << ","
         << num(e.sup) << "," << num(rep.reports[i].combined) << "," << num(rep.slope) << ","
         << num(rep.r2) << "\n";
    }
  }
  return os.str();
}

nlohmann::json convergence_json(const ConvergenceReport& rep) {
  nlohmann::json j;
  j["param_name"] = rep.param_name;
  j["param_values"] = rep.param_values;
  j["slope"] = rep.slope;
  j["r2"] = rep.r2;
  j["target_order"] = rep.target_order;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rep.reports) arr.push_back(r.to_json());
  j["reports"] = arr;
  return j;
}

ProductInequalityReport check_product_inequality(const JetFn& f, const JetFn& g, int m,
                                                 const Box& domain, const GridSpec& spec) {
  auto pts = make_grid(domain, spec);
  const auto& set = MultiIndexSet::get(domain.dim(), m);
  double nf = 0, ng = 0, nfg = 0;
  for (const auto& p : pts) {
    Jet jf = f(p, m), jg = g(p, m);
    Jet jfg = jet_mul(jf, jg);
    for (int k = 0; k < set.size(); ++k) {
      nf = std::max(nf, std::abs(jf.deriv(set.at(k))));
      ng = std::max(ng, std::abs(jg.deriv(set.at(k))));
      nfg = std::max(nfg, std::abs(jfg.deriv(set.at(k))));
    }
  }
  ProductInequalityReport rep;
  rep.lhs = nfg;
  rep.rhs = std::pow(2.0, m) * nf * ng;
  rep.holds = rep.lhs <= rep.rhs * (1.0 + 1e-12);
  return rep;
}

}  // namespace supconv
