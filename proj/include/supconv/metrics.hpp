#pragma once

#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "supconv/jet.hpp"
#include "supconv/network.hpp"
#include "supconv/targets.hpp"

namespace supconv {

struct Box {
  Eigen::VectorXd lo, hi;
  int dim() const { return int(lo.size()); }
};

Box box1(double lo, double hi);
Box box2(double xlo, double xhi, double ylo, double yhi);

// Sup-norm measurement grid: uniform points offset half a step into cell
// interiors (dodging cell boundaries and kinks) plus low-discrepancy extras.
struct GridSpec {
  int per_dim = 0;  // 0 picks the default: 4097 in 1-d, 257 in 2-d
  int random_points = 256;
  unsigned seed = 0;
  std::vector<double> avoid;   // input values to skip (registered kinks)
  double avoid_radius = 1e-9;
};

std::vector<Eigen::VectorXd> make_grid(const Box& box, const GridSpec& spec);

// anything that can produce jets at a point
using JetFn = std::function<Jet(const Eigen::VectorXd&, int)>;
JetFn jets_of(const Network& net);
JetFn jets_of(const TargetFunction& f);

struct SobolevErrorReport {
  int m = 0;
  struct Entry {
    MultiIndex alpha;
    double sup = 0.0;
  };
  std::vector<Entry> entries;  // one per |alpha| <= m
  double combined = 0.0;       // max over entries
  std::string grid_spec;

  double sup_at_order(int k) const;  // max over |alpha| == k
  nlohmann::json to_json() const;
};

SobolevErrorReport sobolev_error(const JetFn& f, const JetFn& g, const Box& domain, int m,
                                 const GridSpec& spec = {});
SobolevErrorReport sobolev_error(const TargetFunction& f, const Network& net, const Box& domain,
                                 int m, const GridSpec& spec = {});
// sup over a union of boxes (exclusion-region measurements)
SobolevErrorReport sobolev_error_union(const JetFn& f, const JetFn& g, const std::vector<Box>& parts,
                                       int m, const GridSpec& spec = {});

// W^{m,inf} norm of a single function by grid sup
double sobolev_norm(const JetFn& f, const Box& domain, int m, const GridSpec& spec = {});

struct ConvergenceReport {
  std::string param_name;
  std::vector<double> param_values;
  std::vector<SobolevErrorReport> reports;
  double slope = 0.0;
  double r2 = 0.0;
  double target_order = 0.0;
};

// least-squares slope of log(error) vs log(param); throws on nonpositive errors
double fit_order(const std::vector<double>& params, const std::vector<double>& errors,
                 double* r2 = nullptr);
void fit_report(ConvergenceReport& rep);  // fits on the combined column

std::string convergence_csv(const ConvergenceReport& rep);
nlohmann::json convergence_json(const ConvergenceReport& rep);

struct ProductInequalityReport {
  double lhs = 0.0;  // ||fg||_{W^m}
  double rhs = 0.0;  // 2^m ||f|| ||g||
  bool holds = false;
};

// Explicit-constant product estimate ||fg|| <= 2^m ||f|| ||g||, all three
// norms estimated on the same grid.
ProductInequalityReport check_product_inequality(const JetFn& f, const JetFn& g, int m,
                                                 const Box& domain, const GridSpec& spec = {});

// worker count for grid partitioning; reads SUPCONV_WORKERS
int worker_count();

}  // namespace supconv
