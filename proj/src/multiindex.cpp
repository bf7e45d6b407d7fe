#include "supconv/multiindex.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace supconv {

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

double mi_factorial(const MultiIndex& a) {
  return factorial(a[0]) * factorial(a[1]) * factorial(a[2]) * factorial(a[3]);
}

namespace {

// graded lexicographic: sort by |alpha|, then lexicographically
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  int ta = mi_total(a), tb = mi_total(b);
  if (ta != tb) return ta < tb;
  return a < b;
}

void enumerate(int dim, int order, MultiIndex cur, int pos, std::vector<MultiIndex>& out) {
  if (pos >= dim || pos >= kMaxJetDim) {
    out.push_back(cur);
    return;
  }
  int used = 0;
  for (int j = 0; j < pos; ++j) used += cur[j];
  for (int v = 0; v <= order - used; ++v) {
    cur[pos] = std::uint8_t(v);
    enumerate(dim, order, cur, pos + 1, out);
  }
}

}  // namespace

MultiIndexSet::MultiIndexSet(int dim, int order) : dim_(dim), order_(order) {
  enumerate(dim, order, MultiIndex{0, 0, 0, 0}, 0, indices_);
  std::sort(indices_.begin(), indices_.end(), graded_lex_less);

  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      MultiIndex s{};
      int tot = 0;
      for (int k = 0; k < kMaxJetDim; ++k) {
        s[k] = std::uint8_t(indices_[i][k] + indices_[j][k]);
        tot += s[k];
      }
      if (tot > order_) continue;
      triples_.push_back({i, j, position(s)});
    }
  }
}

int MultiIndexSet::position(const MultiIndex& a) const {
  if (mi_total(a) > order_) return -1;
  auto it = std::lower_bound(indices_.begin(), indices_.end(), a, graded_lex_less);
  return int(it - indices_.begin());
}

const MultiIndexSet& MultiIndexSet::get(int dim, int order) {
  if (dim < 1 || dim > kMaxJetDim) throw std::invalid_argument("MultiIndexSet: dim out of range");
  if (order < 0 || order > kMaxJetOrder) throw std::invalid_argument("MultiIndexSet: order out of range");
  static std::mutex mu;
  static std::map<std::pair<int, int>, const MultiIndexSet*> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto key = std::make_pair(dim, order);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, new MultiIndexSet(dim, order)).first;
  return *it->second;
}

}  // namespace supconv
