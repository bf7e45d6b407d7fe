#pragma once

#include <array>

#include "supconv/builders.hpp"
#include "supconv/network.hpp"
#include "supconv/smoothstep.hpp"

namespace supconv {

// pattern component per coordinate: 1 or 2 (which translated bump family)
using VmPattern = std::vector<int>;

// The piecewise bump template on [0,3]: S_m rise, unit plateau, mirrored fall.
class BumpTemplate {
 public:
  explicit BumpTemplate(int m);
  int m() const { return sm_.m(); }
  const SmPolynomial& sm() const { return sm_; }

  double eval(double x) const;
  // Taylor coefficients at x; knots {0,1,2,3} admit orders <= m only
  Series series(double x, int order) const;

  // ReLU^j expansion: s(x) = sum_{i=0..3} sum_{j=m+1..2m+1} c[i][j] ReLU^j(x-i)
  double spline_coeff(int knot, int power) const;

 private:
  SmPolynomial sm_;
  std::array<std::vector<double>, 4> spline_;  // per knot, coefficients for powers m+1..2m+1
};

// The translated families s_1, s_2 and tensor products s_vm for a given J.
class BumpFamily {
 public:
  BumpFamily(int m, int J);
  int m() const { return tmpl_.m(); }
  int J() const { return J_; }
  const BumpTemplate& tmpl() const { return tmpl_; }

  double eval1d(int which, double x) const;       // s_1 or s_2
  Series series1d(int which, double x, int order) const;

  double eval(const VmPattern& vm, const Eigen::VectorXd& x) const;
  Jet jet(const VmPattern& vm, const Eigen::VectorXd& x, int order) const;

 private:
  BumpTemplate tmpl_;
  int J_;
};

// value of s_vm at a point (throws outside [0,1]^d)
double eval_partition(const VmPattern& vm, const Eigen::VectorXd& x, int J, int m);
Jet eval_partition_jet(const VmPattern& vm, const Eigen::VectorXd& x, int J, int m, int order);

// Region geometry: per-coordinate cell families and membership tests.
class OmegaGeometry {
 public:
  OmegaGeometry(int d, int J) : d_(d), J_(J) {}
  int d() const { return d_; }
  int J() const { return J_; }

  int cells_per_dim(int vm_component) const { return vm_component == 1 ? J_ : J_ + 1; }
  // closed cell interval of coordinate cell i, clipped to [0,1]
  std::pair<double, double> cell_interval(int vm_component, int i) const;
  // unclipped interval (ball placement for the shifted family)
  std::pair<double, double> cell_interval_unclipped(int vm_component, int i) const;
  bool in_omega_1d(int vm_component, double x) const;
  // cell index containing x, or -1 (gap)
  int cell_index_1d(int vm_component, double x) const;
  bool in_omega(const VmPattern& vm, const Eigen::VectorXd& x) const;
  bool covered(const Eigen::VectorXd& x) const;  // belongs to at least one region

 private:
  int d_, J_;
};

// all 2^d patterns for dimension d
std::vector<VmPattern> all_patterns(int d);

// Network realization of s_vm: spline-on-sawtooth per coordinate, coordinates
// multiplied by product blocks.
Network build_pou_network(const std::string& activation, const VmPattern& vm, int N, int L, int m,
                          double target_eps, const BuildOptions& opts = {});

}  // namespace supconv
