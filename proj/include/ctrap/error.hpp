#pragma once

#include <stdexcept>
#include <string>

namespace ctrap {

enum class errc {
  invalid_dimension,
  kappa_out_of_range,
  order_out_of_range,
  admissibility_violation,
  nonfinite_sample,
  empty_lattice,
  quadrature_not_configured,
  insufficient_levels,
  singular_matrix,
  not_converged,
  ill_conditioned,
  table_kernel_mismatch,
  invalid_argument,
  structure_violation,
};

inline const char* to_string(errc code) {
  switch (code) {
    case errc::invalid_dimension: return "invalid-dimension";
    case errc::kappa_out_of_range: return "kappa-out-of-range";
    case errc::order_out_of_range: return "order-out-of-range";
    case errc::admissibility_violation: return "admissibility-violation";
    case errc::nonfinite_sample: return "nonfinite-sample";
    case errc::empty_lattice: return "empty-lattice";
    case errc::quadrature_not_configured: return "quadrature-not-configured";
    case errc::insufficient_levels: return "insufficient-levels";
    case errc::singular_matrix: return "singular-matrix";
    case errc::not_converged: return "extrapolation-not-converged";
    case errc::ill_conditioned: return "ill-conditioned";
    case errc::table_kernel_mismatch: return "table-kernel-mismatch";
    case errc::invalid_argument: return "invalid-argument";
    case errc::structure_violation: return "structure-violation";
  }
  return "unknown";
}

/// Library exception; `code()` identifies the failure class.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace ctrap
