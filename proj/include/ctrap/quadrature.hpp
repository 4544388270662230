#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "ctrap/error.hpp"
#include "ctrap/kernel.hpp"
#include "ctrap/lattice.hpp"
#include "ctrap/weights.hpp"

namespace ctrap {

/// phi in C_c^N, given in natural axis order; zero outside the support ball.
struct RegularPart {
  PointFunction evaluate;
  double support_radius = 1.0;
  int smoothness = 0;  // declared N, informational
  std::string id;

  double operator()(std::span<const double> x) const {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    if (r2 > support_radius * support_radius) return 0.0;
    return evaluate(x);
  }
};

struct QuadratureResult {
  double value = 0.0;
  double h = 0.0;
  int p = 0;
  std::int64_t n_lattice_points = 0;
  double trapezoid = 0.0;
  double correction_term = 0.0;
};

/// A_h^p[phi] = h^delta sum_eta w_eta sum_{beta in G_eta} sgn(prod_{j<kappa} beta_j) phi(beta h).
inline double correction_term(const RegularPart& phi, const WeightTable& table, double h) {
  if (!(h > 0.0)) throw error(errc::invalid_argument, "mesh size must be positive");
  const int n = table.n;
  std::vector<double> x(n);
  CompensatedSum total;
  for (std::size_t e = 0; e < table.grid.size(); ++e) {
    CompensatedSum orbit_sum;
    for (const auto& beta : table.grid.orbits[e]) {
      const int s = beta.sign(table.kappa);
      for (int i = 0; i < n; ++i) x[table.axis_order[i]] = beta[i] * h;
      orbit_sum.add(s * phi(x));
    }
    total.add(table.weights[e] * orbit_sum.value());
  }
  return std::pow(h, table.delta) * total.value();
}

inline void check_table_kernel(const KernelSpec& k, const WeightTable& t) {
  if (t.n != k.n || t.kappa != k.kappa || std::abs(t.delta - k.delta) > 1e-12 || t.axis_order != k.axis_order) {
    std::ostringstream msg;
    msg << "table (" << t.kernel_id << ", n=" << t.n << ", kappa=" << t.kappa << ", delta=" << t.delta
        << ") does not match kernel (" << k.id << ", n=" << k.n << ", kappa=" << k.kappa
        << ", delta=" << k.delta << ")";
    throw error(errc::table_kernel_mismatch, msg.str());
  }
}

/// Q_h^p[phi s] = T_h^0[phi s] + A_h^p[phi].
inline QuadratureResult integrate(const RegularPart& phi, const KernelSpec& k, const WeightTable& table, double h,
                                  const LatticeOptions& lat = {}) {
  check_table_kernel(k, table);
  if (!(phi.support_radius > 0.0) || !std::isfinite(phi.support_radius)) {
    throw error(errc::invalid_argument, "support radius must be finite and positive");
  }
  const int n = k.n;
  const double R = std::max(phi.support_radius, h);
  auto f = [&](std::span<const double> x, std::span<double> out) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    if (r2 > phi.support_radius * phi.support_radius) {
      out[0] = 0.0;
      return;
    }
    std::vector<double> nat(n);
    for (int i = 0; i < n; ++i) nat[k.axis_order[i]] = x[i];
    const double v = phi.evaluate(nat);
    out[0] = v == 0.0 ? 0.0 : v * k.evaluate(x);
  };
  QuadratureResult res;
  res.h = h;
  res.p = table.p;
  res.trapezoid = punctured_lattice_sum(h, n, R, 1, f, lat)[0];
  res.correction_term = correction_term(phi, table, h);
  res.value = res.trapezoid + res.correction_term;
  const std::int64_t side = 2 * lattice_half_width(h, R) + 1;
  res.n_lattice_points = 1;
  for (int i = 0; i < n; ++i) res.n_lattice_points *= side;
  res.n_lattice_points -= 1;
  return res;
}

}  // namespace ctrap
