#pragma once

#include <algorithm>
#include <cfloat>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctrap/error.hpp"
#include "ctrap/kernel.hpp"
#include "ctrap/lattice.hpp"
#include "ctrap/multiindex.hpp"
#include "ctrap/special.hpp"
#include "ctrap/sphere.hpp"

namespace ctrap {

/// Working type of the right-hand side pipeline: c(h) divides a difference of
/// O(1) quantities by up to h^-7, which eats the digits of a double.
using extended = long double;

/// g(x) = exp(-|x|^m); derivatives vanish at 0 through order m - 1.
struct ReferenceMollifier {
  int m = 8;

  /// Smallest even m >= 8 with m - 1 >= 2p - kappa + 1.
  static ReferenceMollifier for_order(int p, int kappa) {
    int m = 8;
    while (m - 1 < 2 * p - kappa + 1) m += 2;
    return {m};
  }

  int flatness() const noexcept { return m - 1; }

  /// g as a function of r^2.
  double radial(double r2) const {
    if (m % 2 == 0) return std::exp(-ipow(r2, m / 2));
    return std::exp(-std::pow(r2, 0.5 * m));
  }

  extended radial_extended(extended r2) const {
    if (m % 2 == 0) {
      extended v = 1;
      for (int k = 0; k < m / 2; ++k) v *= r2;
      return std::exp(-v);
    }
    return std::exp(-std::pow(r2, extended(m) / 2));
  }

  double operator()(std::span<const double> x) const {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return radial(r2);
  }
};

/// 2 xi - sum_{j < kappa} e_j.
inline MultiIndex row_exponent(const MultiIndex& xi, int kappa) {
  std::vector<int> g(xi.size());
  for (std::size_t j = 0; j < xi.size(); ++j) g[j] = 2 * xi[j] - (static_cast<int>(j) < kappa ? 1 : 0);
  return MultiIndex(g);
}

/// Power of h dividing row xi of c(h): 2|xi| - kappa + delta.
inline double row_scaling_exponent(const MultiIndex& xi, int kappa, double delta) {
  return 2.0 * static_cast<double>(xi.norm1()) - kappa + delta;
}

struct CoefficientMatrix {
  Eigen::MatrixXd entries;
  CorrectionGrid grid;
};

struct AssemblyOptions {
  // Test fixture: take the sign over every nonzero coordinate instead of the first kappa.
  bool inject_sign_fault = false;
};

/// K_ij = sum over beta in G_j of sgn(prod_{l<kappa} beta_l) beta^(2 xi_i - sum_{l<kappa} e_l).
inline CoefficientMatrix assemble_K(const CorrectionGrid& grid, const AssemblyOptions& opts = {}) {
  if (grid.empty()) throw error(errc::empty_lattice, "correction grid is empty");
  const std::size_t N = grid.size();
  CoefficientMatrix K;
  K.grid = grid;
  K.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  const int sign_axes = opts.inject_sign_fault ? grid.n : grid.kappa;
  for (std::size_t i = 0; i < N; ++i) {
    const MultiIndex gamma = row_exponent(grid.points[i], grid.kappa);
    for (std::size_t j = 0; j < N; ++j) {
      double sum = 0.0;
      for (const auto& beta : grid.orbits[j]) {
        int s = 1;
        for (int l = 0; l < sign_axes; ++l) {
          if (beta[l] < 0) s = -s;
        }
        double term = s;
        for (int l = 0; l < grid.n; ++l) term *= ipow(static_cast<double>(beta[l]), gamma[l]);
        sum += term;
      }
      K.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum;
    }
  }
  return K;
}

/// D_m: the matrix generated by I+(m,p), entries eta_j^(2 xi_i).
inline Eigen::MatrixXd generated_matrix(int m, int p) {
  const auto pts = positive_grid(m, p);
  const auto N = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd D(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      double v = 1.0;
      for (int l = 0; l < m; ++l) v *= ipow(static_cast<double>(pts[j][l]), 2 * pts[i][l]);
      D(i, j) = v;
    }
  }
  return D;
}

struct BlockInfo {
  int zeros = 0;               // k
  std::size_t size = 0;        // rows in A_k
  std::size_t groups = 0;      // number of J sub-blocks
  std::size_t group_size = 0;  // |I+(n-k,p)| (kappa axes counted as positive)
};

struct StructureViolation {
  std::size_t i = 0, j = 0;
  double expected = 0.0;
  double found = 0.0;
  std::string rule;
};

struct StructureReport {
  bool passed = true;
  std::vector<BlockInfo> blocks;
  std::optional<StructureViolation> violation;
  std::size_t checked_entries = 0;
};

/// Checks the block upper-triangular zero pattern, the zero off-diagonal
/// J-sub-blocks of every A_k, and that each diagonal sub-block equals
/// 2^(n-k) D_(n-k) (times 1/prod_{l<kappa} eta_l when kappa > 0). Exact comparisons.
inline StructureReport verify_block_structure(const CoefficientMatrix& K) {
  const auto& grid = K.grid;
  StructureReport report;
  const std::size_t N = grid.size();
  std::vector<int> zeros_of(N), group_of(N);
  for (std::size_t g = 0; g < grid.groups.size(); ++g) {
    for (std::size_t i = grid.groups[g].first; i < grid.groups[g].last; ++i) {
      zeros_of[i] = grid.groups[g].zeros;
      group_of[i] = static_cast<int>(g);
    }
  }
  for (const auto& g : grid.groups) {
    if (report.blocks.empty() || report.blocks.back().zeros != g.zeros) {
      report.blocks.push_back({g.zeros, 0, 0, g.last - g.first});
    }
    report.blocks.back().size += g.last - g.first;
    report.blocks.back().groups += 1;
  }

  auto fail = [&](std::size_t i, std::size_t j, double expected, double found, const char* rule) {
    if (!report.passed) return;
    report.passed = false;
    report.violation = StructureViolation{i, j, expected, found, rule};
  };

  for (std::size_t i = 0; i < N && report.passed; ++i) {
    for (std::size_t j = 0; j < N && report.passed; ++j) {
      const double v = K.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      ++report.checked_entries;
      if (zeros_of[i] < zeros_of[j]) {
        if (v != 0.0) fail(i, j, 0.0, v, "below-diagonal block");
      } else if (zeros_of[i] == zeros_of[j] && group_of[i] != group_of[j]) {
        if (v != 0.0) fail(i, j, 0.0, v, "off-diagonal sub-block");
      }
    }
  }

  for (const auto& g : grid.groups) {
    if (!report.passed) break;
    const int m = grid.n - g.zeros;
    const Eigen::MatrixXd D = generated_matrix(m, grid.p);
    const std::size_t size = g.last - g.first;
    if (static_cast<std::size_t>(D.rows()) != size) {
      fail(g.first, g.first, static_cast<double>(D.rows()), static_cast<double>(size), "sub-block size");
      break;
    }
    const double scale = std::ldexp(1.0, m);
    for (std::size_t a = 0; a < size && report.passed; ++a) {
      for (std::size_t b = 0; b < size && report.passed; ++b) {
        const std::size_t i = g.first + a, j = g.first + b;
        double h = 1.0;
        for (int l = 0; l < grid.kappa; ++l) h *= grid.points[j][l];
        const double expected = scale * D(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        const double found = K.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * h;
        if (found != expected) fail(i, j, expected, found, "diagonal sub-block");
      }
    }
  }
  return report;
}

/// Throws structure_violation naming the offending entry.
inline StructureReport require_block_structure(const CoefficientMatrix& K) {
  auto report = verify_block_structure(K);
  if (!report.passed) {
    const auto& v = *report.violation;
    std::ostringstream msg;
    msg << v.rule << " at (" << v.i << "," << v.j << "): expected " << v.expected << ", found " << v.found;
    throw error(errc::structure_violation, msg.str());
  }
  return report;
}

struct MomentOptions {
  int angular_order = 24;  // custom kernels: Gauss-Legendre points per polar angle
  double angular_tol = 1e-12;
};

/// sphere_monomial_integral in extended precision (library tgamma).
inline extended sphere_monomial_integral_extended(const MultiIndex& a) {
  extended num = 2;
  for (int v : a) {
    if (v % 2 != 0) return 0;
    num *= std::tgamma(extended(v + 1) / 2);
  }
  return num / std::tgamma((extended(a.size()) + extended(a.norm1())) / 2);
}

/// Integral over R^n of g(x) s(x) x^gamma, extended precision.
inline extended moment_extended(const KernelSpec& k, const ReferenceMollifier& g, const MultiIndex& gamma,
                                const MomentOptions& opts = {}) {
  if (k.monomial) {
    std::vector<int> a(k.n);
    for (int j = 0; j < k.n; ++j) a[j] = k.monomial->alpha[j] + gamma[j];
    // delta + |gamma| = n + |alpha + gamma| - r
    const extended s = extended(k.n) + extended(k.monomial->alpha.norm1() + gamma.norm1()) -
                       extended(k.monomial->r);
    return std::tgamma(s / g.m) / g.m * sphere_monomial_integral_extended(MultiIndex(a));
  }
  const double radial = gamma_fn((k.delta + static_cast<double>(gamma.norm1())) / g.m) / g.m;
  if (!k.angular || opts.angular_order < 1) {
    throw error(errc::quadrature_not_configured, "kernel " + k.id + " has no closed-form moments");
  }
  const PointFunction f = [&](std::span<const double> theta) { return k.angular(theta) * monomial(theta, gamma); };
  const double coarse = sphere_integral(f, k.n, opts.angular_order);
  const double fine = sphere_integral(f, k.n, opts.angular_order + opts.angular_order / 2 + 1);
  if (std::abs(fine - coarse) > opts.angular_tol * std::max(1.0, std::abs(fine))) {
    std::ostringstream msg;
    msg << "angular rule for " << k.id << " did not converge: " << coarse << " vs " << fine;
    throw error(errc::not_converged, msg.str());
  }
  return radial * fine;
}

/// Integral over R^n of g(x) s(x) x^gamma.
inline double moment(const KernelSpec& k, const ReferenceMollifier& g, const MultiIndex& gamma,
                     const MomentOptions& opts = {}) {
  return static_cast<double>(moment_extended(k, g, gamma, opts));
}

inline void check_kernel_grid(const KernelSpec& k, const CorrectionGrid& grid) {
  if (grid.n != k.n || grid.kappa != k.kappa) {
    std::ostringstream msg;
    msg << "grid (n=" << grid.n << ", kappa=" << grid.kappa << ") does not match kernel " << k.id
        << " (n=" << k.n << ", kappa=" << k.kappa << ")";
    throw error(errc::table_kernel_mismatch, msg.str());
  }
}

inline std::vector<extended> moments_extended(const KernelSpec& k, const ReferenceMollifier& g,
                                              const CorrectionGrid& grid, const MomentOptions& opts = {}) {
  check_kernel_grid(k, grid);
  std::vector<extended> out;
  out.reserve(grid.size());
  for (const auto& xi : grid.points) out.push_back(moment_extended(k, g, row_exponent(xi, grid.kappa), opts));
  return out;
}

inline std::vector<double> moments(const KernelSpec& k, const ReferenceMollifier& g, const CorrectionGrid& grid,
                                   const MomentOptions& opts = {}) {
  const auto m = moments_extended(k, g, grid, opts);
  return {m.begin(), m.end()};
}

/// Lattice truncation radius at mesh h: the mollifier tail is kept below
/// 1e-3 eps h^e_max so it cannot show up after the division by h^e.
inline double rhs_truncation_radius(const ReferenceMollifier& g, const CorrectionGrid& grid, double delta,
                                    double h) {
  double e_max = 0.0;
  for (const auto& xi : grid.points) e_max = std::max(e_max, row_scaling_exponent(xi, grid.kappa, delta));
  const double eps = 1e-3 * LDBL_EPSILON * std::min(1.0, std::pow(h, e_max));
  return truncation_radius_for(ExpPowerDecay{static_cast<double>(g.m)}, std::max(eps, 1e-300), grid.n, grid.p, h);
}

/// c_i(h) = h^-(2|xi_i| - kappa + delta) (moment_i - T_h^0[g s x^gamma_i]); one lattice pass for all rows.
/// Monomial kernels are evaluated in extended precision; custom kernels through their double evaluator.
inline std::vector<double> rhs_c(const KernelSpec& k, const ReferenceMollifier& g, const CorrectionGrid& grid,
                                 double h, const std::vector<extended>& mom, const LatticeOptions& lat = {}) {
  check_kernel_grid(k, grid);
  if (mom.size() != grid.size()) throw error(errc::invalid_argument, "moment vector size mismatch");
  const std::size_t rows = grid.size();
  std::vector<MultiIndex> gammas;
  int max_power = 0;
  for (const auto& xi : grid.points) {
    gammas.push_back(row_exponent(xi, grid.kappa));
    for (int v : gammas.back()) max_power = std::max(max_power, v);
  }
  const int n = grid.n;
  const double R = rhs_truncation_radius(g, grid, k.delta, h);

  const std::optional<MonomialKernel> mono = k.monomial;
  const extended half_r = mono ? extended(mono->r) / 2 : 0;
  auto f = [&](std::span<const double> x, std::span<extended> out) {
    extended r2 = 0;
    for (double v : x) r2 += extended(v) * v;
    const extended gv = g.radial_extended(r2);
    if (gv == 0) {
      std::fill(out.begin(), out.end(), extended(0));
      return;
    }
    extended base = gv;
    if (mono) {
      for (int j = 0; j < n; ++j) {
        for (int e = 0; e < mono->alpha[j]; ++e) base *= x[j];
      }
      base /= std::pow(r2, half_r);
    } else {
      base *= k.evaluate(x);
    }
    // powers[j * (max_power + 1) + e] = x_j^e
    extended powers[max_dimension * (2 * max_order + 1)];
    const int stride = max_power + 1;
    for (int j = 0; j < n; ++j) {
      extended v = 1;
      for (int e = 0; e <= max_power; ++e) {
        powers[j * stride + e] = v;
        v *= x[j];
      }
    }
    for (std::size_t i = 0; i < rows; ++i) {
      extended v = base;
      for (int j = 0; j < n; ++j) v *= powers[j * stride + gammas[i][j]];
      out[i] = v;
    }
  };
  const auto T = punctured_lattice_sum<extended>(h, n, R, rows, f, lat);

  std::vector<double> c(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double e = row_scaling_exponent(grid.points[i], grid.kappa, k.delta);
    c[i] = static_cast<double>((mom[i] - T[i]) / std::pow(extended(h), extended(e)));
  }
  return c;
}

inline std::vector<double> rhs_c(const KernelSpec& k, const ReferenceMollifier& g, const CorrectionGrid& grid,
                                 double h) {
  return rhs_c(k, g, grid, h, moments_extended(k, g, grid));
}

struct RichardsonResult {
  std::vector<double> limit;  // c2(h0/2)
  double est_error = 0.0;     // |c2(h0) - c2(h0/2)|_inf
  std::vector<std::vector<double>> levels;
};

/// Two Richardson steps with ratios 2^q - 1 and 2^(q+2) - 1 from c at h0, h0/2, h0/4, h0/8.
inline RichardsonResult richardson_limit(std::vector<std::vector<double>> levels, int order0) {
  if (levels.size() < 4) {
    throw error(errc::insufficient_levels,
                "need c at four meshes h0..h0/8, got " + std::to_string(levels.size()));
  }
  const std::size_t rows = levels[0].size();
  for (const auto& l : levels) {
    if (l.size() != rows) throw error(errc::invalid_argument, "level vectors differ in length");
  }
  auto step = [rows](const std::vector<double>& coarse, const std::vector<double>& fine, int q) {
    const double d = std::ldexp(1.0, q) - 1.0;
    std::vector<double> out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = fine[i] + (fine[i] - coarse[i]) / d;
    return out;
  };
  std::vector<std::vector<double>> c1;
  for (std::size_t l = 0; l + 1 < 4; ++l) c1.push_back(step(levels[l], levels[l + 1], order0));
  const auto c2_h0 = step(c1[0], c1[1], order0 + 2);
  const auto c2_h1 = step(c1[1], c1[2], order0 + 2);
  RichardsonResult res;
  for (std::size_t i = 0; i < rows; ++i) res.est_error = std::max(res.est_error, std::abs(c2_h0[i] - c2_h1[i]));
  res.limit = c2_h1;
  res.levels = std::move(levels);
  return res;
}

template <typename F>
RichardsonResult richardson_limit(F&& c_at, double h0, int order0) {
  std::vector<std::vector<double>> levels;
  for (int l = 0; l < 4; ++l) levels.push_back(c_at(std::ldexp(h0, -l)));
  return richardson_limit(std::move(levels), order0);
}

struct WeightTable {
  CorrectionGrid grid;
  std::string kernel_id;
  int n = 0;
  int p = 0;
  int kappa = 0;
  double delta = 0.0;
  std::vector<int> axis_order;  // canonical slot -> natural axis
  std::vector<double> weights;
  double est_error = 0.0;
  double h_base = 0.0;
  double residual = 0.0;
  int mollifier_m = 0;
  bool gate_passed = true;

  /// Signed extension sgn(prod_{j<kappa} beta_j) w_|beta|; 0 off the stencil.
  double weight(const SignedLatticePoint& beta) const {
    std::vector<int> a(beta.size());
    for (std::size_t j = 0; j < beta.size(); ++j) a[j] = std::abs(beta[j]);
    const MultiIndex eta(a);
    const auto it = std::find(grid.points.begin(), grid.points.end(), eta);
    if (it == grid.points.end()) return 0.0;
    return beta.sign(kappa) * weights[static_cast<std::size_t>(it - grid.points.begin())];
  }
};

struct SolveOptions {
  double gate = 1e-11;
  bool enforce_gate = true;
  bool force = false;  // allow p > 6
  double min_rcond = 1e-15;
  std::optional<ReferenceMollifier> mollifier;  // default: for_order(p, kappa)
  LatticeOptions lattice;
  MomentOptions moment;
  std::function<void(double h, double seconds)> on_level;
};

struct LinearSolve {
  Eigen::VectorXd x;
  double rcond = 0.0;
  double residual = 0.0;  // |Kx - c|_inf / |c|_inf
};

/// Partially pivoted LU with a reciprocal-condition check.
inline LinearSolve solve_dense(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double min_rcond = 1e-15) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  LinearSolve out;
  out.rcond = lu.rcond();
  if (!(out.rcond > min_rcond) || !std::isfinite(out.rcond)) {
    std::ostringstream msg;
    msg << "coefficient matrix is singular to working precision (rcond " << out.rcond << ")";
    throw error(errc::singular_matrix, msg.str());
  }
  out.x = lu.solve(b);
  const double bn = b.lpNorm<Eigen::Infinity>();
  const double rn = (A * out.x - b).lpNorm<Eigen::Infinity>();
  out.residual = bn > 0.0 ? rn / bn : rn;
  return out;
}

/// Weights from K w = lim c(h), the limit taken by two Richardson steps from h0.
inline WeightTable solve_weights(const KernelSpec& k, const CorrectionGrid& grid, double h0,
                                 const SolveOptions& opts = {}) {
  check_kernel_grid(k, grid);
  if (grid.empty()) throw error(errc::empty_lattice, "correction grid is empty");
  if (2 * grid.p < grid.kappa) {
    throw error(errc::order_out_of_range, "need 2p >= kappa, got p=" + std::to_string(grid.p) +
                                              ", kappa=" + std::to_string(grid.kappa));
  }
  if (grid.p > 6 && !opts.force) {
    throw error(errc::ill_conditioned, "p > 6 gives increasingly ill-conditioned systems; set force to proceed");
  }
  if (!(h0 > 0.0)) throw error(errc::invalid_argument, "h0 must be positive");
  const ReferenceMollifier g = opts.mollifier.value_or(ReferenceMollifier::for_order(grid.p, grid.kappa));
  if (g.flatness() < 2 * grid.p - grid.kappa + 1) {
    throw error(errc::invalid_argument, "mollifier exp(-|x|^" + std::to_string(g.m) +
                                            ") is not flat enough for p=" + std::to_string(grid.p));
  }

  const auto mom = moments_extended(k, g, grid, opts.moment);
  const int order0 = 2 * grid.p - grid.kappa + 2;
  auto rich = richardson_limit(
      [&](double h) {
        const auto t0 = std::chrono::steady_clock::now();
        auto c = rhs_c(k, g, grid, h, mom, opts.lattice);
        if (opts.on_level) {
          opts.on_level(h, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        return c;
      },
      h0, order0);

  const auto K = assemble_K(grid);
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(rich.limit.data(), static_cast<Eigen::Index>(rich.limit.size()));
  const auto sol = solve_dense(K.entries, c, opts.min_rcond);

  WeightTable t;
  t.grid = grid;
  t.kernel_id = k.id;
  t.n = grid.n;
  t.p = grid.p;
  t.kappa = grid.kappa;
  t.delta = k.delta;
  t.axis_order = k.axis_order;
  t.weights.assign(sol.x.data(), sol.x.data() + sol.x.size());
  t.est_error = rich.est_error;
  t.h_base = h0;
  t.residual = sol.residual;
  t.mollifier_m = g.m;
  t.gate_passed = rich.est_error <= opts.gate;
  if (opts.enforce_gate && !t.gate_passed) {
    std::ostringstream msg;
    msg.precision(3);
    msg << "Richardson consistency " << rich.est_error << " exceeds gate " << opts.gate << " for " << k.id
        << ", p=" << grid.p;
    throw error(errc::not_converged, msg.str());
  }
  return t;
}

}  // namespace ctrap
