#pragma once

#include <Eigen/Dense>

#include "supconv/network.hpp"

namespace supconv {

// One-hidden-layer ReLU staircase in index space: value values[k] on
// [k - margin_lo, k+1 - gap_hi] around integer plateaus; precisely, plateaus
// cover [k, k+1-gap] with the ramp filling the trailing gap. The first/last
// plateau values extend to -/+ infinity.
Network shallow_value_staircase(const Eigen::VectorXd& values, double gap);

// Exact ReLU staircase s(x) = k on [k/J, (k+1)/J - delta * 1_{k<J-1}], linear
// in the delta-gaps, realized as a composition of shallow staircases within
// the width/depth budget implied by N and L. steps = J by default; the
// assembler passes J+1 for the shifted cell family.
Network build_staircase(int J, double delta, int N, int L, int steps = 0, double step_width = 0.0);

// 2/J-periodic ReLU hat of height 1/J covering [0, base_teeth * 2^folds * 2/J]:
// a one-layer template of base_teeth teeth plus `folds` reflection layers.
Network build_sawtooth(int folds, int base_teeth, int J);

// number of strict slope sign changes of a piecewise-linear scalar network,
// scanned on a dense grid (test oracle for tooth counting)
int count_teeth(const Network& net, double lo, double hi, int samples = 1 << 16);

}  // namespace supconv
