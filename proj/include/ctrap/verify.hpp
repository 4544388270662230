#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctrap/kernel.hpp"
#include "ctrap/lattice.hpp"
#include "ctrap/multiindex.hpp"
#include "ctrap/quadrature.hpp"
#include "ctrap/weights.hpp"

namespace ctrap {

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  std::vector<std::string> failures;
  double seconds = 0.0;
  double worst = 0.0;  // largest measured deviation, suite-specific units

  void fail(std::string msg) {
    passed = false;
    failures.push_back(std::move(msg));
  }
};

namespace detail {

class SuiteTimer {
 public:
  explicit SuiteTimer(SuiteResult& r) : r_(r), t0_(std::chrono::steady_clock::now()) {}
  ~SuiteTimer() { r_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  SuiteResult& r_;
  std::chrono::steady_clock::time_point t0_;
};

inline double log_abs_det(const Eigen::MatrixXd& A) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::MatrixXd& U = lu.matrixLU();
  double s = 0.0;
  for (Eigen::Index i = 0; i < U.rows(); ++i) s += std::log2(std::abs(U(i, i)));
  return s;
}

// Every xi in [lo, hi]^n, odometer order.
inline void for_each_box_point(int n, int lo, int hi, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> v(n, lo);
  if (n == 0) {
    f(v);
    return;
  }
  while (true) {
    f(v);
    int j = n - 1;
    while (j >= 0 && v[j] == hi) {
      v[j] = lo;
      --j;
    }
    if (j < 0) return;
    ++v[j];
  }
}

}  // namespace detail

struct StructureSuiteOptions {
  int max_n = 3;
  int max_p = 3;
  std::vector<int> kappas{0, 1, 2};
  double residual_tol = 1e-12;
  bool inject_sign_fault = false;
  std::uint64_t seed = 7;
};

/// Zero pattern, J-sub-block and B = D checks, and a solve with a random right-hand side.
inline SuiteResult structure_suite(const StructureSuiteOptions& o = {}) {
  SuiteResult r;
  r.name = "zero-pattern";
  detail::SuiteTimer timer(r);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int n = 1; n <= o.max_n; ++n) {
    for (int p = 0; p <= o.max_p; ++p) {
      for (int kappa : o.kappas) {
        if (kappa > n) continue;
        const auto grid = enumerate_grid(n, p, kappa);
        if (grid.empty()) continue;
        ++r.cases;
        const auto K = assemble_K(grid, AssemblyOptions{o.inject_sign_fault});
        const auto rep = verify_block_structure(K);
        std::ostringstream tag;
        tag << "n=" << n << " p=" << p << " kappa=" << kappa;
        if (!rep.passed) {
          const auto& v = *rep.violation;
          std::ostringstream msg;
          msg << tag.str() << ": " << v.rule << " at (" << v.i << "," << v.j << ") point " << grid.points[v.i].str()
              << " x " << grid.points[v.j].str() << ": expected " << v.expected << ", found " << v.found;
          r.fail(msg.str());
          continue;
        }
        Eigen::VectorXd c(static_cast<Eigen::Index>(grid.size()));
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = unif(rng);
        try {
          const auto sol = solve_dense(K.entries, c);
          r.worst = std::max(r.worst, sol.residual);
          if (!(sol.residual <= o.residual_tol)) {
            std::ostringstream msg;
            msg << tag.str() << ": relative residual " << sol.residual;
            r.fail(msg.str());
          }
        } catch (const error& e) {
          r.fail(tag.str() + ": " + e.what());
        }
      }
    }
  }
  return r;
}

/// |det K| against prod_k |det D_k|^C(n,k) for kappa = 0; the ratio must be a power of two.
inline SuiteResult determinant_suite(int max_n = 3, int max_p = 3, double tol = 1e-9) {
  SuiteResult r;
  r.name = "determinant-factorization";
  detail::SuiteTimer timer(r);
  for (int n = 1; n <= max_n; ++n) {
    for (int p = 0; p <= max_p; ++p) {
      const auto grid = enumerate_grid(n, p, 0);
      const auto K = assemble_K(grid);
      double log2_prod = 0.0;
      for (int k = 0; k <= n; ++k) {
        if (positive_grid(k, p).empty()) continue;
        log2_prod += static_cast<double>(binomial(n, k)) * detail::log_abs_det(generated_matrix(k, p));
      }
      const double ratio = detail::log_abs_det(K.entries) - log2_prod;
      const double dev = std::abs(std::exp2(ratio - std::round(ratio)) - 1.0);
      ++r.cases;
      r.worst = std::max(r.worst, dev);
      if (!(dev <= tol)) {
        std::ostringstream msg;
        msg << "n=" << n << " p=" << p << ": log2 ratio " << ratio << " is not an integer";
        r.fail(msg.str());
      }
    }
  }
  return r;
}

/// Counting identities against brute-force enumeration (exact integer comparisons).
inline SuiteResult enumeration_suite(int max_n = 4, int max_p = 8) {
  SuiteResult r;
  r.name = "enumeration-lemma";
  detail::SuiteTimer timer(r);

  for (int n = 1; n <= max_n; ++n) {
    for (int p = 0; p <= max_p; ++p) {
      std::int64_t count = 0;
      detail::for_each_box_point(n, 1, std::max(p, 1), [&](const std::vector<int>& v) {
        int s = 0;
        for (int x : v) s += x;
        if (s == p) ++count;
      });
      ++r.cases;
      if (count != count_positive_compositions(n, p)) {
        r.fail("N(" + std::to_string(n) + "," + std::to_string(p) + ") closed form " +
               std::to_string(count_positive_compositions(n, p)) + " vs enumeration " + std::to_string(count));
      }
    }
  }

  for (int n = 1; n <= max_n; ++n) {
    for (int m = 1; m <= max_p; ++m) {
      std::vector<MultiIndex> set;
      detail::for_each_box_point(n, 1, m, [&](const std::vector<int>& v) {
        int s = 0;
        for (int x : v) s += x;
        if (s == m) set.emplace_back(v);
      });
      for (int j = 1; j < m; ++j) {
        ++r.cases;
        const std::int64_t lhs = multiplicity_Lambda(set, j);
        const std::int64_t rhs = n * count_positive_compositions(n - 1, m - j);
        if (lhs != rhs) {
          r.fail("Lambda(n=" + std::to_string(n) + ",m=" + std::to_string(m) + ",j=" + std::to_string(j) +
                 ") = " + std::to_string(lhs) + " vs " + std::to_string(rhs));
        }
      }
    }
  }

  for (int m = 0; m <= 5; ++m) {
    for (int M = 0; M <= 10; ++M) {
      std::int64_t lhs = 0;
      for (int j = m; j <= M; ++j) lhs += falling_factorial<std::int64_t>(j, m);
      const std::int64_t rhs = falling_factorial<std::int64_t>(M + 1, m + 1) / (m + 1);
      ++r.cases;
      if (lhs != rhs || falling_factorial<std::int64_t>(M + 1, m + 1) % (m + 1) != 0) {
        r.fail("falling factorial sum m=" + std::to_string(m) + " M=" + std::to_string(M));
      }
    }
  }

  for (int n = 1; n <= max_n; ++n) {
    for (int p = 0; p <= 6; ++p) {
      for (int kappa = 0; kappa <= n; ++kappa) {
        const auto grid = enumerate_grid(n, p, kappa);
        std::size_t direct = 0;
        detail::for_each_box_point(n, 0, p, [&](const std::vector<int>& v) {
          int s = 0;
          bool ok = true;
          for (int j = 0; j < n; ++j) {
            s += v[j];
            ok = ok && (j >= kappa || v[j] >= 1);
          }
          if (ok && s <= p) ++direct;
        });
        std::size_t blocks = 0;
        for (const auto& g : grid.groups) blocks += g.last - g.first;
        ++r.cases;
        if (blocks != grid.size() || direct != grid.size()) {
          r.fail("block decomposition n=" + std::to_string(n) + " p=" + std::to_string(p) +
                 " kappa=" + std::to_string(kappa));
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
          int nz = 0;
          for (int v : grid.points[i]) nz += v != 0;
          if (grid.orbits[i].size() != (std::size_t{1} << nz)) r.fail("orbit size at " + grid.points[i].str());
        }
      }
    }
  }
  return r;
}

/// Multi-indices with |xi|_1 <= max_degree whose parity disagrees with the kernel symmetry.
inline std::vector<MultiIndex> mismatched_parity(int n, int kappa, int max_degree) {
  std::vector<MultiIndex> out;
  detail::for_each_box_point(n, 0, max_degree, [&](const std::vector<int>& v) {
    int s = 0;
    bool mismatch = false;
    for (int j = 0; j < n; ++j) {
      s += v[j];
      mismatch = mismatch || (j < kappa ? v[j] % 2 == 0 : v[j] % 2 == 1);
    }
    if (s <= max_degree && mismatch) out.emplace_back(v);
  });
  return out;
}

struct ParityCase {
  const KernelSpec* kernel = nullptr;
  const WeightTable* table = nullptr;
};

/// T_h^0[g s x^xi], the moment, and A_h^p[g x^xi] vanish for mismatched parity.
inline SuiteResult parity_suite(const std::vector<ParityCase>& cases, double h = 0.125, int max_degree = 4,
                                double rel_tol = 1e-13) {
  SuiteResult r;
  r.name = "parity-annihilation";
  detail::SuiteTimer timer(r);
  const ReferenceMollifier g{8};
  for (const auto& c : cases) {
    const KernelSpec& k = *c.kernel;
    const auto xis = mismatched_parity(k.n, k.kappa, max_degree);
    const double R = truncation_radius_for(ExpPowerDecay{8.0}, 1e-30, k.n, max_degree, h);
    auto f = [&](std::span<const double> x, std::span<double> out) {
      const double base = g(x) * k.evaluate(x);
      for (std::size_t i = 0; i < xis.size(); ++i) {
        const double v = base * monomial(x, xis[i]);
        out[2 * i] = v;
        out[2 * i + 1] = std::abs(v);
      }
    };
    const auto sums = punctured_lattice_sum(h, k.n, R, 2 * xis.size(), f);
    for (std::size_t i = 0; i < xis.size(); ++i) {
      const std::string tag = k.id + " xi=" + xis[i].str();
      ++r.cases;
      const double t_rel = sums[2 * i + 1] > 0 ? std::abs(sums[2 * i]) / sums[2 * i + 1] : 0.0;
      r.worst = std::max(r.worst, t_rel);
      if (!(t_rel <= rel_tol)) r.fail(tag + ": lattice sum relative " + std::to_string(t_rel));

      const double mom = moment(k, g, xis[i]);
      if (mom != 0.0) r.fail(tag + ": moment " + std::to_string(mom));

      if (c.table) {
        const WeightTable& t = *c.table;
        double a = 0.0, a_abs = 0.0;
        std::vector<double> x(k.n);
        for (std::size_t e = 0; e < t.grid.size(); ++e) {
          for (const auto& beta : t.grid.orbits[e]) {
            for (int j = 0; j < k.n; ++j) x[j] = beta[j] * h;
            const double v = t.weights[e] * beta.sign(t.kappa) * g(x) * monomial(x, xis[i]);
            a += v;
            a_abs += std::abs(v);
          }
        }
        const double a_rel = a_abs > 0 ? std::abs(a) / a_abs : 0.0;
        r.worst = std::max(r.worst, a_rel);
        if (!(a_rel <= rel_tol)) r.fail(tag + ": correction relative " + std::to_string(a_rel));
      }
    }
  }
  return r;
}

}  // namespace ctrap
