#pragma once

#include <vector>

#include "supconv/network.hpp"

namespace supconv {

enum class FitPointsLayout {
  packed,  // multi-value bit packing with guard bits and gated extraction
  direct,  // one quantized value per plateau; conversion-friendly
};

// ReLU network fitting phi(i) ~ values[i] at integer indices with
// |phi(i) - values[i]| <= 2 N^{-2s} L^{-2s} and 0 <= phi <= 2 everywhere.
// Values are quantized to ceil(2 s log2(NL)) bits; the packed layout stores
// several values per weight and extracts them with staircase bit selectors.
Network fit_points(const std::vector<double>& values, int N, int L, int s,
                   FitPointsLayout layout = FitPointsLayout::packed);

// quantization step used by fit_points (exposed for tests)
int fit_points_bits(int N, int L, int s);

}  // namespace supconv
