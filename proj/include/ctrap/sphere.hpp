#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "ctrap/error.hpp"
#include "ctrap/kernel.hpp"
#include "ctrap/multiindex.hpp"
#include "ctrap/special.hpp"

namespace ctrap {

/// Integral of theta^a over S^(n-1): 2 prod Gamma((a_i+1)/2) / Gamma((n+|a|)/2), or 0 if some a_i is odd.
inline double sphere_monomial_integral(const MultiIndex& a) {
  double num = 2.0;
  for (int v : a) {
    if (v % 2 != 0) return 0.0;
    num *= gamma_fn(0.5 * (v + 1));
  }
  return num / gamma_fn(0.5 * (static_cast<double>(a.size()) + static_cast<double>(a.norm1())));
}

/// Product rule on S^(n-1) in hyperspherical coordinates: `order` Gauss-Gegenbauer
/// points in t = cos(theta) per polar angle and 2*order trapezoid points in
/// azimuth. Exact for polynomials of degree < 2*order.
inline double sphere_integral(const PointFunction& f, int n, int order) {
  using std::numbers::pi;
  if (n < 1) throw error(errc::invalid_dimension, "sphere dimension");
  if (n == 1) {
    double a = 1.0, b = -1.0;
    return f(std::span<const double>(&a, 1)) + f(std::span<const double>(&b, 1));
  }
  if (order < 1) throw error(errc::quadrature_not_configured, "angular order must be >= 1");

  // Polar angle k carries sin^(n-2-k), i.e. weight (1 - t^2)^((n-3-k)/2) in t.
  std::vector<std::pair<std::vector<double>, std::vector<double>>> polar;
  for (int k = 0; k < n - 2; ++k) polar.push_back(gauss_gegenbauer(order, 0.5 * (n - 2 - k)));
  const int azimuth = 2 * order;
  const double dphi = 2.0 * pi / azimuth;

  std::vector<double> x(n);
  std::vector<int> idx(n - 2, 0);
  double total = 0.0;
  while (true) {
    double weight = 1.0, radius = 1.0;
    for (int k = 0; k < n - 2; ++k) {
      const double t = polar[k].first[idx[k]];
      x[k] = radius * t;
      weight *= polar[k].second[idx[k]];
      radius *= std::sqrt(1.0 - t * t);
    }
    double inner = 0.0;
    for (int a = 0; a < azimuth; ++a) {
      const double phi = dphi * a;
      x[n - 2] = radius * std::cos(phi);
      x[n - 1] = radius * std::sin(phi);
      inner += f(x);
    }
    total += weight * inner * dphi;

    int k = n - 3;
    while (k >= 0 && idx[k] == order - 1) {
      idx[k] = 0;
      --k;
    }
    if (k < 0) break;
    ++idx[k];
  }
  return total;
}

}  // namespace ctrap
