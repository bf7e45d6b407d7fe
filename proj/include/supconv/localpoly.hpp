#pragma once

#include <map>

#include "supconv/metrics.hpp"
#include "supconv/partition.hpp"
#include "supconv/targets.hpp"

namespace supconv {

// sum over pairs |alpha+beta| <= n-1 of 1/(alpha! beta!), the explicit
// coefficient-bound constant of the averaged Taylor polynomial
double averaged_taylor_constant(int n, int d);

// Taylor polynomial of order n averaged against the normalized bump over the
// ball B(center, radius), re-expanded in monomials about the origin.
struct AveragedTaylor {
  Eigen::VectorXd center;
  double radius = 0.0;
  int order = 0;  // n
  std::map<MultiIndex, double> coeffs;

  double eval(const Eigen::VectorXd& x) const;
  Jet jet(const Eigen::VectorXd& x, int order) const;
};

AveragedTaylor averaged_taylor(const TargetFunction& f, const Eigen::VectorXd& x0, double r, int n,
                               int quad_nodes = 0);

// Per-cell constant coefficient tables realizing the local piecewise
// polynomial approximant on a region family.
struct PiecewisePoly {
  int J = 0, n = 0, d = 1;
  VmPattern vm;
  std::vector<int> sizes;                           // cells per dimension
  std::vector<std::map<MultiIndex, double>> table;  // flat cell index -> coefficients

  int cells() const { return int(table.size()); }
  int flat_index(const std::vector<int>& idx) const;
  // cell containing x, or -1 when x falls in a gap
  int locate(const Eigen::VectorXd& x) const;
  const std::map<MultiIndex, double>& cell_coeffs(int flat) const { return table[size_t(flat)]; }
};

PiecewisePoly local_piecewise(const TargetFunction& f, int J, const VmPattern& vm, int n);

// exact polynomial jet of the active cell; x must lie in a cell interior
Jet eval_piecewise_jet(const PiecewisePoly& p, const Eigen::VectorXd& x, int order);

}  // namespace supconv
