#pragma once

#include <cfloat>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "ctrap/error.hpp"
#include "ctrap/kernel.hpp"
#include "ctrap/quadrature.hpp"
#include "ctrap/weights.hpp"

namespace ctrap {

/// (1 + x1 + x1^2)(1 + x2 + x2^2)(1 + x3 + x3^2) max((1 - |x|^2)^9, 0).
inline RegularPart builtin_regular_part() {
  RegularPart phi;
  phi.support_radius = 1.0;
  phi.smoothness = 8;
  phi.id = "builtin-ball-polynomial";
  phi.evaluate = [](std::span<const double> x) {
    double r2 = 0.0, poly = 1.0;
    for (double v : x) {
      r2 += v * v;
      poly *= 1.0 + v + v * v;
    }
    const double t = 1.0 - r2;
    return t > 0.0 ? poly * ipow(t, 9) : 0.0;
  };
  return phi;
}

/// Reference value of the builtin regular part against x1^2/|x|^3.5 in R^3.
inline double reference_J1() {
  return 148281598410752.0 / 943446919389975.0 * std::numbers::pi;
}

/// Reference value of the builtin regular part against x1/|x|^2 in R^3.
inline double reference_J2() { return 85458944.0 / 4504759875.0 * std::numbers::pi; }

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw error(errc::invalid_argument, "need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

struct ConvergencePoint {
  double h = 0.0;
  double value = 0.0;
  double abs_error = 0.0;
  bool below_floor = false;  // excluded from the fit
  double seconds = 0.0;
};

struct ConvergenceReport {
  std::string kernel_id;
  int p = 0;
  std::vector<ConvergencePoint> points;
  double slope = 0.0;
  double theoretical_order = 0.0;
  double tolerance = 0.25;
  double floor = 0.0;
  int points_in_fit = 0;
  bool monotone = true;  // errors decrease down the ladder until the floor
  bool budget_exceeded = false;
  bool pass = false;
};

struct ConvergenceOptions {
  double tolerance = 0.25;
  double floor_factor = 1e3;  // floor = floor_factor * eps * |I|
  double budget_seconds = 0.0;  // stop after the point that crosses it; 0 disables
  LatticeOptions lattice;
  std::function<void(const ConvergencePoint&)> on_point;
};

/// Runs integrate over the ladder (coarse to fine) and fits the error slope above the roundoff floor.
inline ConvergenceReport convergence_study(const RegularPart& phi, const KernelSpec& k, const WeightTable& table,
                                           double exact, const std::vector<double>& h_ladder,
                                           const ConvergenceOptions& opts = {}) {
  ConvergenceReport rep;
  rep.kernel_id = k.id;
  rep.p = table.p;
  rep.theoretical_order = 2.0 * table.p - table.kappa + 2.0 + table.delta;
  rep.tolerance = opts.tolerance;
  rep.floor = opts.floor_factor * DBL_EPSILON * std::abs(exact);

  std::vector<double> hs, errs;
  const auto start = std::chrono::steady_clock::now();
  for (double h : h_ladder) {
    if (opts.budget_seconds > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > opts.budget_seconds) {
      rep.budget_exceeded = true;
      break;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto q = integrate(phi, k, table, h, opts.lattice);
    ConvergencePoint pt;
    pt.h = h;
    pt.value = q.value;
    pt.abs_error = std::abs(q.value - exact);
    pt.below_floor = pt.abs_error < rep.floor;
    pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opts.on_point) opts.on_point(pt);
    rep.points.push_back(pt);
    if (!pt.below_floor) {
      hs.push_back(h);
      errs.push_back(pt.abs_error);
    }
  }
  for (std::size_t i = 1; i < rep.points.size(); ++i) {
    const auto& a = rep.points[i - 1];
    const auto& b = rep.points[i];
    if (b.h < a.h && !a.below_floor && !b.below_floor && !(b.abs_error < a.abs_error)) rep.monotone = false;
  }
  rep.points_in_fit = static_cast<int>(hs.size());
  if (hs.size() >= 2) {
    rep.slope = loglog_slope(hs, errs);
    rep.pass = !rep.budget_exceeded && rep.monotone && std::abs(rep.slope - rep.theoretical_order) <= rep.tolerance;
  }
  return rep;
}

}  // namespace ctrap
