#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ctrap {

namespace detail {

// Lanczos approximation, g = 7, nine terms (relative error ~1e-15 on x > 0).
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coefficients = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

}  // namespace detail

/// Gamma function via the Lanczos approximation, reflection for x < 1/2.
inline double gamma_fn(double x) {
  using std::numbers::pi;
  if (x < 0.5) return pi / (std::sin(pi * x) * gamma_fn(1.0 - x));
  x -= 1.0;
  double a = detail::lanczos_coefficients[0];
  const double t = x + detail::lanczos_g + 0.5;
  for (std::size_t i = 1; i < detail::lanczos_coefficients.size(); ++i) {
    a += detail::lanczos_coefficients[i] / (x + static_cast<double>(i));
  }
  return std::sqrt(2.0 * pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  using std::numbers::pi;
  std::vector<double> nodes(n), weights(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {nodes, weights};
}

/// Gauss rule for the weight (1 - t^2)^(lambda - 1/2) on [-1, 1], lambda > 0,
/// by Golub-Welsch on the Gegenbauer recurrence.
inline std::pair<std::vector<double>, std::vector<double>> gauss_gegenbauer(int n, double lambda) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int j = 1; j < n; ++j) {
    const double b = std::sqrt(j * (j + 2.0 * lambda - 1.0) / (4.0 * (j + lambda) * (j + lambda - 1.0)));
    J(j, j - 1) = J(j - 1, j) = b;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(lambda + 0.5) / std::tgamma(lambda + 1.0);
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    weights[i] = mu0 * v * v;
  }
  return {nodes, weights};
}

}  // namespace ctrap
