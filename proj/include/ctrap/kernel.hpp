#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ctrap/error.hpp"
#include "ctrap/multiindex.hpp"

namespace ctrap {

using PointFunction = std::function<double(std::span<const double>)>;

/// x^k for integer k >= 0, with 0^0 = 1.
inline double ipow(double x, int k) {
  double out = 1.0;
  for (; k > 0; k >>= 1) {
    if (k & 1) out *= x;
    x *= x;
  }
  return out;
}

/// x^gamma = prod_j x_j^gamma_j, 0^0 = 1.
inline double monomial(std::span<const double> x, const MultiIndex& gamma) {
  double out = 1.0;
  for (std::size_t j = 0; j < gamma.size(); ++j) out *= ipow(x[j], gamma[j]);
  return out;
}

/// Closed-form data for s(x) = x^alpha / |x|^r, stored in canonical axis order.
struct MonomialKernel {
  MultiIndex alpha;
  double r = 0.0;
};

/// A weakly singular kernel s(x) = |x|^(delta-n) rho(x/|x|) with kappa odd axes.
///
/// `evaluate` and `angular` act on canonical coordinates, where the kappa odd
/// axes come first. `axis_order[i]` is the natural (user) axis stored in
/// canonical slot i.
struct KernelSpec {
  int n = 0;
  double delta = 0.0;
  int kappa = 0;
  PointFunction evaluate;
  PointFunction angular;
  std::string id;
  std::vector<int> axis_order;
  std::optional<MonomialKernel> monomial;

  double operator()(std::span<const double> x) const { return evaluate(x); }

  std::vector<double> to_natural(std::span<const double> canonical) const {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[axis_order[i]] = canonical[i];
    return out;
  }

  std::vector<double> to_canonical(std::span<const double> natural) const {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = natural[axis_order[i]];
    return out;
  }

  bool identity_axes() const {
    for (int i = 0; i < n; ++i) {
      if (axis_order[i] != i) return false;
    }
    return true;
  }
};

inline void check_kernel_parameters(int n, double delta, int kappa) {
  if (n < 1 || n > max_dimension) throw error(errc::invalid_dimension, "kernel dimension out of range");
  if (kappa < 0 || kappa > n) throw error(errc::kappa_out_of_range, "kernel kappa out of range");
  if (!(delta > 0.0 && delta < n)) {
    std::ostringstream msg;
    msg << "dilation exponent must lie in (0, " << n << "), got " << delta;
    throw error(errc::admissibility_violation, msg.str());
  }
}

/// s(x) = x^alpha / |x|^r with |alpha|_1 < r < |alpha|_1 + n, given in natural axis order.
/// Odd-exponent axes are moved first (stable); kappa is their count.
inline KernelSpec make_monomial_kernel(const MultiIndex& alpha, double r) {
  const int n = static_cast<int>(alpha.size());
  if (n < 1 || n > max_dimension) throw error(errc::invalid_dimension, "monomial kernel dimension out of range");
  const double degree = static_cast<double>(alpha.norm1());
  if (!(degree < r && r < degree + n)) {
    std::ostringstream msg;
    msg << "need deg P < r < deg P + n, got deg P = " << degree << ", r = " << r << ", n = " << n;
    throw error(errc::admissibility_violation, msg.str());
  }

  KernelSpec k;
  k.n = n;
  k.delta = n + degree - r;
  for (int i = 0; i < n; ++i) {
    if (alpha[i] % 2 == 1) k.axis_order.push_back(i);
  }
  k.kappa = static_cast<int>(k.axis_order.size());
  for (int i = 0; i < n; ++i) {
    if (alpha[i] % 2 == 0) k.axis_order.push_back(i);
  }
  std::vector<int> canonical(n);
  for (int i = 0; i < n; ++i) canonical[i] = alpha[k.axis_order[i]];
  MultiIndex a(canonical);
  k.monomial = MonomialKernel{a, r};

  const double half_r = 0.5 * r;
  k.evaluate = [a, half_r](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return monomial(x, a) / std::pow(r2, half_r);
  };
  k.angular = [a](std::span<const double> theta) { return monomial(theta, a); };

  std::ostringstream id;
  id << "monomial(alpha=[";
  for (int i = 0; i < n; ++i) id << (i ? "," : "") << alpha[i];
  id << "],r=" << r << ")";
  k.id = id.str();
  return k;
}

/// A user kernel in canonical coordinates. Admissibility is only checked by validate_kernel.
inline KernelSpec make_custom_kernel(int n, double delta, int kappa, PointFunction evaluate,
                                     PointFunction angular, std::string id) {
  check_kernel_parameters(n, delta, kappa);
  KernelSpec k;
  k.n = n;
  k.delta = delta;
  k.kappa = kappa;
  k.evaluate = std::move(evaluate);
  k.angular = std::move(angular);
  k.id = std::move(id);
  k.axis_order.resize(n);
  for (int i = 0; i < n; ++i) k.axis_order[i] = i;
  return k;
}

struct KernelValidation {
  bool passed = true;
  double max_dilation_violation = 0.0;
  double max_symmetry_violation = 0.0;
  int violating_axis = -1;  // canonical axis of the worst symmetry failure
  std::vector<double> violating_point;
  int samples = 0;
};

/// Samples dilation s(hx) = h^(delta-n) s(x) for h in {0.5, 2, 3.7} and every
/// single-axis reflection at random points; relative violations are compared to tol.
inline KernelValidation validate_kernel(const KernelSpec& k, int samples, double tol,
                                        std::uint64_t seed = 20240601) {
  if (samples < 1) throw error(errc::invalid_argument, "samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  const double scales[] = {0.5, 2.0, 3.7};

  auto relative = [](double diff, double a, double b) {
    const double ref = std::max(std::abs(a), std::abs(b));
    return ref > 0.0 ? std::abs(diff) / ref : std::abs(diff);
  };

  KernelValidation report;
  report.samples = samples;
  std::vector<double> x(k.n), y(k.n);
  for (int s = 0; s < samples; ++s) {
    double r2 = 0.0;
    do {
      r2 = 0.0;
      for (auto& v : x) {
        v = coord(rng);
        r2 += v * v;
      }
    } while (r2 < 1e-6);
    const double sx = k.evaluate(x);

    for (double h : scales) {
      for (int i = 0; i < k.n; ++i) y[i] = h * x[i];
      const double expected = std::pow(h, k.delta - k.n) * sx;
      const double got = k.evaluate(y);
      report.max_dilation_violation =
          std::max(report.max_dilation_violation, relative(got - expected, got, expected));
    }

    for (int j = 0; j < k.n; ++j) {
      y = x;
      y[j] = -y[j];
      const double sf = k.evaluate(y);
      const double v = j < k.kappa ? relative(sf + sx, sf, sx) : relative(sf - sx, sf, sx);
      if (v > report.max_symmetry_violation) {
        report.max_symmetry_violation = v;
        if (v > tol) {
          report.violating_axis = j;
          report.violating_point = x;
        }
      }
    }
  }
  report.passed = report.max_dilation_violation <= tol && report.max_symmetry_violation <= tol;
  return report;
}

}  // namespace ctrap
