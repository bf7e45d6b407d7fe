#pragma once

#include "supconv/bitextract.hpp"
#include "supconv/localpoly.hpp"
#include "supconv/partition.hpp"

namespace supconv {

// End-to-end plan: target f approximated in W^{m,inf} by a single network of
// the given activation at size parameters (N, L).
struct AssemblyPlan {
  std::string activation = "gelu";
  TargetFunction target;
  int n = 3;  // Sobolev regularity driving the local polynomial degree n-1
  int m = 1;  // error norm order
  int d = 1;
  int N = 1, L = 2;
  BuildOptions opts;

  int J() const;
  void validate() const;
};

struct BudgetEntry {
  std::string stage;
  double width_budget = 0.0, depth_budget = 0.0;
  int actual_width = 0, actual_depth = 0;
  bool ok() const {
    return double(actual_width) <= width_budget && double(actual_depth) <= depth_budget;
  }
};

struct AssemblyReport {
  double predicted_error = 0.0;
  double coeff_bound = 0.0;  // C2(n,d) ||f||_{W^{n-1,inf}}
  std::map<std::string, double> tolerances;
  std::vector<BudgetEntry> budgets;
  nlohmann::json to_json() const;
};

// local approximant on the region family vm (staircase cell indexing,
// bit-extraction coefficient lookups, monomial blocks, product recombination)
Network build_local_approx(const AssemblyPlan& plan, const VmPattern& vm,
                           AssemblyReport* report = nullptr);

// global approximant: partition networks times local approximants, summed
Network build_full_approx(const AssemblyPlan& plan, AssemblyReport* report = nullptr);

}  // namespace supconv
