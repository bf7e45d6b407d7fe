#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace supconv {

// Hard caps for jet arithmetic; |alpha| enumeration grows combinatorially
// beyond this and desk-scale runs never need more.
inline constexpr int kMaxJetOrder = 8;
inline constexpr int kMaxJetDim = 4;

using MultiIndex = std::array<std::uint8_t, kMaxJetDim>;

inline int mi_total(const MultiIndex& a) {
  return int(a[0]) + int(a[1]) + int(a[2]) + int(a[3]);
}

double factorial(int n);
double mi_factorial(const MultiIndex& a);

// Enumeration of all multi-indices with |alpha| <= order in `dim` variables,
// in graded lexicographic order. Instances are cached and immutable, so
// lookups are safe from any number of threads.
class MultiIndexSet {
 public:
  static const MultiIndexSet& get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return int(indices_.size()); }
  const MultiIndex& at(int i) const { return indices_[i]; }
  // Position of a multi-index, or -1 if |alpha| > order.
  int position(const MultiIndex& a) const;

  struct ProductTriple {
    std::int32_t a, b, dst;
  };
  // All (i, j, k) with index(i) + index(j) = index(k); drives truncated
  // convolution in jet multiplication.
  const std::vector<ProductTriple>& product_triples() const { return triples_; }

 private:
  MultiIndexSet(int dim, int order);

  int dim_, order_;
  std::vector<MultiIndex> indices_;
  std::vector<ProductTriple> triples_;
};

}  // namespace supconv
