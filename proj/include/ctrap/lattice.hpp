#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ctrap/error.hpp"
#include "ctrap/kernel.hpp"

namespace ctrap {

/// Neumaier's variant of Kahan summation.
template <typename T = double>
class BasicCompensatedSum {
 public:
  void add(T v) {
    const T t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  T sum() const noexcept { return sum_; }
  T compensation() const noexcept { return comp_; }
  T value() const noexcept { return sum_ + comp_; }

 private:
  T sum_ = 0;
  T comp_ = 0;
};

using CompensatedSum = BasicCompensatedSum<double>;

/// Order-independent sum: terms are sorted by magnitude, then compensated.
template <typename T>
T sorted_compensated_sum(std::vector<T> terms) {
  std::sort(terms.begin(), terms.end(), [](T a, T b) { return std::abs(a) < std::abs(b); });
  BasicCompensatedSum<T> acc;
  for (T t : terms) acc.add(t);
  return acc.value();
}

struct LatticeOptions {
  bool compensated = true;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Half-width N of the index box for |beta h|_inf <= R.
inline std::int64_t lattice_half_width(double h, double radius) {
  if (!(h > 0.0) || !std::isfinite(h)) throw error(errc::invalid_argument, "mesh size must be positive");
  if (!(radius >= h)) {
    std::ostringstream msg;
    msg << "truncation radius " << radius << " is below the mesh size " << h;
    throw error(errc::empty_lattice, msg.str());
  }
  const double ratio = radius / h;
  if (ratio > 2147483648.0) throw error(errc::invalid_argument, "R/h exceeds 2^31");
  return static_cast<std::int64_t>(std::floor(ratio * (1.0 + 1e-12)));
}

/// h^n times the sum of f over the nonzero lattice points beta h with |beta h|_inf <= R.
///
/// `f(x, out)` writes `outputs` values for the point x. The outermost axis is
/// split into one chunk per index; chunks are combined with a sorted
/// compensated reduction, so the result does not depend on the thread count.
/// T is the accumulation (and output) type.
template <typename T = double, typename F>
std::vector<T> punctured_lattice_sum(double h, int n, double radius, std::size_t outputs, F&& f,
                                     const LatticeOptions& opts = {}) {
  if (n < 1 || n > max_dimension) throw error(errc::invalid_dimension, "lattice dimension out of range");
  const std::int64_t N = lattice_half_width(h, radius);
  const std::size_t chunks = static_cast<std::size_t>(2 * N + 1);

  struct ChunkResult {
    std::vector<T> sum, comp;
    std::optional<std::vector<std::int64_t>> bad_point;
    std::size_t bad_output = 0;
  };
  std::vector<ChunkResult> results(chunks);

  auto run_chunk = [&](std::size_t chunk) {
    ChunkResult& res = results[chunk];
    std::vector<BasicCompensatedSum<T>> acc(outputs);
    std::vector<T> plain(outputs, T(0));
    std::vector<std::int64_t> idx(n, -N);
    idx[0] = static_cast<std::int64_t>(chunk) - N;
    std::vector<double> x(n);
    std::vector<T> out(outputs);
    while (true) {
      bool origin = true;
      for (int j = 0; j < n; ++j) {
        x[j] = static_cast<double>(idx[j]) * h;
        origin = origin && idx[j] == 0;
      }
      if (!origin) {
        f(std::span<const double>(x), std::span<T>(out));
        for (std::size_t o = 0; o < outputs; ++o) {
          if (!std::isfinite(out[o])) {
            res.bad_point = idx;
            res.bad_output = o;
            return;
          }
          if (opts.compensated) {
            acc[o].add(out[o]);
          } else {
            plain[o] += out[o];
          }
        }
      }
      int j = n - 1;
      while (j >= 1 && idx[j] == N) {
        idx[j] = -N;
        --j;
      }
      if (j < 1) break;
      ++idx[j];
    }
    res.sum.resize(outputs);
    res.comp.assign(outputs, T(0));
    for (std::size_t o = 0; o < outputs; ++o) {
      if (opts.compensated) {
        res.sum[o] = acc[o].sum();
        res.comp[o] = acc[o].compensation();
      } else {
        res.sum[o] = plain[o];
      }
    }
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& res : results) {
    if (res.bad_point) {
      std::ostringstream msg;
      msg << "integrand output " << res.bad_output << " is not finite at lattice point (";
      for (std::size_t j = 0; j < res.bad_point->size(); ++j) msg << (j ? "," : "") << (*res.bad_point)[j];
      msg << ")";
      throw error(errc::nonfinite_sample, msg.str());
    }
  }

  const T scale = std::pow(T(h), n);
  std::vector<T> totals(outputs);
  for (std::size_t o = 0; o < outputs; ++o) {
    if (opts.compensated) {
      std::vector<T> terms;
      terms.reserve(2 * chunks);
      for (const auto& res : results) {
        terms.push_back(res.sum[o]);
        if (res.comp[o] != T(0)) terms.push_back(res.comp[o]);
      }
      totals[o] = sorted_compensated_sum(std::move(terms)) * scale;
    } else {
      T s = 0;
      for (const auto& res : results) s += res.sum[o];
      totals[o] = s * scale;
    }
  }
  return totals;
}

struct LatticeSumRequest {
  double h = 0.0;
  int n = 0;
  PointFunction integrand;
  double truncation_radius = 0.0;
  bool compensated = true;
  unsigned threads = 0;
};

/// T_h^0[f] = h^n sum over beta != 0 of f(beta h), truncated to the box |beta h|_inf <= R.
inline double punctured_trapezoid(const LatticeSumRequest& req) {
  const auto& f = req.integrand;
  auto totals = punctured_lattice_sum(
      req.h, req.n, req.truncation_radius, 1,
      [&f](std::span<const double> x, std::span<double> out) { out[0] = f(x); },
      LatticeOptions{req.compensated, req.threads});
  return totals[0];
}

/// exp(-|x|^m) style decay.
struct ExpPowerDecay {
  double m = 8.0;
};

/// Integrand vanishes outside |x| <= radius.
struct CompactSupport {
  double radius = 1.0;
};

using DecayDescriptor = std::variant<ExpPowerDecay, CompactSupport>;

/// Radius beyond which exp(-R^m) R^(n+2p) <= eps stays true (the bound is
/// decreasing past its maximum), never below h. Compact support returns its radius.
inline double truncation_radius_for(const DecayDescriptor& decay, double eps, int n, int p,
                                    double h = 0.0) {
  if (const auto* c = std::get_if<CompactSupport>(&decay)) return std::max(c->radius, h);
  const double m = std::get<ExpPowerDecay>(decay).m;
  if (!(m > 0.0) || !(eps > 0.0)) throw error(errc::invalid_argument, "need m > 0 and eps > 0");
  const double c = n + 2.0 * p;
  auto log_bound = [&](double R) { return -std::pow(R, m) + c * std::log(R); };
  const double log_eps = std::log(eps);
  double lo = std::pow(c / m, 1.0 / m);  // maximiser of the bound
  if (log_bound(lo) <= log_eps) return std::max(lo, h);
  double hi = 2.0 * lo;
  while (log_bound(hi) > log_eps) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_bound(mid) > log_eps ? lo : hi) = mid;
  }
  return std::max(hi, h);
}

}  // namespace ctrap
