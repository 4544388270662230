#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "ctrap/error.hpp"

namespace ctrap {

// Documented enumeration limits; all counts below fit in 64-bit integers.
inline constexpr int max_dimension = 8;
inline constexpr int max_order = 12;

/// An n-tuple of nonnegative integers.
class MultiIndex {
 public:
  MultiIndex() = default;

  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    for (int v : entries_) {
      if (v < 0) throw error(errc::invalid_argument, "multi-index entries must be nonnegative");
    }
  }

  MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

  std::size_t size() const noexcept { return entries_.size(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  const std::vector<int>& entries() const noexcept { return entries_; }

  /// |xi|_1, exact.
  std::int64_t norm1() const {
    return std::accumulate(entries_.begin(), entries_.end(), std::int64_t{0});
  }

  std::string str() const {
    std::string out = "(";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(entries_[i]);
    }
    return out + ")";
  }

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> entries_;
};

/// A point of Z^n; orbit members of a grid point.
class SignedLatticePoint {
 public:
  SignedLatticePoint() = default;
  explicit SignedLatticePoint(std::vector<int> entries) : entries_(std::move(entries)) {}
  SignedLatticePoint(std::initializer_list<int> entries) : entries_(entries) {}

  std::size_t size() const noexcept { return entries_.size(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  const std::vector<int>& entries() const noexcept { return entries_; }

  /// sgn of the product of the first kappa coordinates (empty product is +1).
  int sign(int kappa) const {
    int s = 1;
    for (int j = 0; j < kappa; ++j) {
      if (entries_[j] == 0) return 0;
      if (entries_[j] < 0) s = -s;
    }
    return s;
  }

  std::string str() const {
    std::string out = "(";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(entries_[i]);
    }
    return out + ")";
  }

  friend auto operator<=>(const SignedLatticePoint&, const SignedLatticePoint&) = default;
  friend bool operator==(const SignedLatticePoint&, const SignedLatticePoint&) = default;

 private:
  std::vector<int> entries_;
};

/// Number of coordinates of xi equal to j.
inline int multiplicity_lambda(const MultiIndex& xi, int j) {
  return static_cast<int>(std::count(xi.begin(), xi.end(), j));
}

/// Total occurrences of j over a set of multi-indices.
inline std::int64_t multiplicity_Lambda(const std::vector<MultiIndex>& set, int j) {
  std::int64_t total = 0;
  for (const auto& xi : set) total += multiplicity_lambda(xi, j);
  return total;
}

/// (x)_m = x (x-1) ... (x-m+1), (x)_0 = 1.
template <typename T>
T falling_factorial(T x, int m) {
  T out = T(1);
  for (int k = 1; k <= m; ++k) out *= (x - T(k - 1));
  return out;
}

inline std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

/// |{xi in N^m : |xi|_1 = p}| (positive entries), via (p-1)_{m-1} / (m-1)!.
inline std::int64_t count_positive_compositions(int m, int p) {
  if (m < 0 || p < 0) throw error(errc::invalid_argument, "negative argument");
  if (m == 0) return p == 0 ? 1 : 0;
  if (p < m) return 0;
  std::int64_t factorial = 1;
  for (int k = 2; k <= m - 1; ++k) factorial *= k;
  return falling_factorial<std::int64_t>(p - 1, m - 1) / factorial;
}

/// sign flips of every nonzero coordinate; size 2^(number of nonzero entries).
inline std::vector<SignedLatticePoint> orbit(const MultiIndex& eta) {
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (eta[i] != 0) nonzero.push_back(i);
  }
  std::vector<SignedLatticePoint> out;
  out.reserve(std::size_t{1} << nonzero.size());
  for (std::uint32_t mask = 0; mask < (1u << nonzero.size()); ++mask) {
    std::vector<int> v(eta.begin(), eta.end());
    for (std::size_t b = 0; b < nonzero.size(); ++b) {
      if (mask & (1u << b)) v[nonzero[b]] = -v[nonzero[b]];
    }
    out.emplace_back(std::move(v));
  }
  return out;
}

/// A contiguous run of grid points sharing one zero pattern J.
struct ZeroGroup {
  int zeros = 0;               // k = |J|
  std::vector<int> zero_axes;  // J, 0-based, ascending
  std::size_t first = 0;       // [first, last) into CorrectionGrid::points
  std::size_t last = 0;
};

/// The ordered correction grid I(n,p) and its orbit sets.
///
/// Ordering: blocks by k (number of zero coordinates among the non-odd axes)
/// from k = n - kappa down to 0; inside a block, zero patterns J in
/// lexicographic order; inside a pattern, dictionary order.
struct CorrectionGrid {
  int n = 0;
  int p = 0;
  int kappa = 0;
  std::vector<MultiIndex> points;
  std::vector<std::vector<SignedLatticePoint>> orbits;
  std::vector<ZeroGroup> groups;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

namespace detail {

// Dictionary-order enumeration of xi with xi_j = 0 on `zero`, xi_j >= 1 elsewhere, |xi|_1 <= p.
inline void fill_pattern(std::vector<int>& current, const std::vector<bool>& zero, std::size_t pos,
                         int remaining, std::vector<MultiIndex>& out) {
  if (pos == current.size()) {
    out.emplace_back(current);
    return;
  }
  if (zero[pos]) {
    current[pos] = 0;
    fill_pattern(current, zero, pos + 1, remaining, out);
    return;
  }
  // Positive slots still to fill after this one need at least one unit each.
  int later = 0;
  for (std::size_t q = pos + 1; q < current.size(); ++q) later += zero[q] ? 0 : 1;
  for (int v = 1; v <= remaining - later; ++v) {
    current[pos] = v;
    fill_pattern(current, zero, pos + 1, remaining - v, out);
  }
}

inline void combinations(int first, int last, int k, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == k) {
    out.push_back(current);
    return;
  }
  for (int v = first; v < last; ++v) {
    current.push_back(v);
    combinations(v + 1, last, k, current, out);
    current.pop_back();
  }
}

}  // namespace detail

/// Subsets of size k of {first, ..., last-1} in lexicographic order.
inline std::vector<std::vector<int>> lexicographic_subsets(int first, int last, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  detail::combinations(first, last, k, current, out);
  return out;
}

/// Points xi with xi_j = 0 exactly on J, positive elsewhere, |xi|_1 <= p, in dictionary order.
inline std::vector<MultiIndex> pattern_points(int n, int p, const std::vector<int>& zero_axes) {
  std::vector<bool> zero(n, false);
  for (int j : zero_axes) zero[j] = true;
  std::vector<int> current(n, 0);
  std::vector<MultiIndex> out;
  detail::fill_pattern(current, zero, 0, p, out);
  return out;
}

/// I+(m,p) = {xi in N^m : |xi|_1 <= p}, dictionary order.
inline std::vector<MultiIndex> positive_grid(int m, int p) {
  return pattern_points(m, p, {});
}

inline void check_grid_arguments(int n, int p, int kappa) {
  if (n < 1 || n > max_dimension) {
    throw error(errc::invalid_dimension,
                "dimension must be in [1, " + std::to_string(max_dimension) + "], got " +
                    std::to_string(n));
  }
  if (kappa < 0 || kappa > n) {
    throw error(errc::kappa_out_of_range,
                "kappa must be in [0, n], got " + std::to_string(kappa));
  }
  if (p < 0 || p > max_order) {
    throw error(errc::order_out_of_range,
                "order must be in [0, " + std::to_string(max_order) + "], got " +
                    std::to_string(p));
  }
}

inline CorrectionGrid enumerate_grid(int n, int p, int kappa) {
  check_grid_arguments(n, p, kappa);
  CorrectionGrid grid;
  grid.n = n;
  grid.p = p;
  grid.kappa = kappa;
  for (int k = n - kappa; k >= 0; --k) {
    for (auto& J : lexicographic_subsets(kappa, n, k)) {
      auto pts = pattern_points(n, p, J);
      if (pts.empty()) continue;
      ZeroGroup group;
      group.zeros = k;
      group.zero_axes = std::move(J);
      group.first = grid.points.size();
      for (auto& xi : pts) grid.points.push_back(std::move(xi));
      group.last = grid.points.size();
      grid.groups.push_back(std::move(group));
    }
  }
  grid.orbits.reserve(grid.points.size());
  for (const auto& eta : grid.points) grid.orbits.push_back(orbit(eta));
  return grid;
}

}  // namespace ctrap
