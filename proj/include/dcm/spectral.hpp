#pragma once

#include "dcm/timestepper.hpp"

namespace dcm {

/// One converged pair of the generalized problem C M_ε⁻¹ Cᵀ h = ν M_μ h.
struct EigenPair {
  double value = 0.0;     // ν
  double residual = 0.0;  // ‖C Mε⁻¹ Cᵀ h − ν Mμ h‖ / ‖Mμ h‖ (same units as ν)
  VectorX h;              // magnetic eigenvector
  VectorX e;              // electric partner Mε⁻¹ Cᵀ h / √ν
};

struct EigenResult {
  double lambda_max = 0.0;  // largest pencil eigenvalue (power iteration)
  int iterations = 0;       // operator applications spent in the Lanczos sweeps
  int restarts = 0;
  std::vector<EigenPair> pairs;  // ascending by value
};

struct LanczosOptions {
  int max_basis = 180;
  int max_restarts = 80;
  double tol = 1e-10;         // residual bound, relative to the shift
  double kernel_rtol = 1e-8;  // Ritz values below kernel_rtol·λ_max count as kernel
  double shift_safety = 1.02;
  std::uint64_t seed = 20240901;
  bool want_vectors = true;
};

/// Smallest `count` nonzero pencil eigenvalues. The operator is symmetrized with
/// the Cholesky factor of M_μ and shifted to B = cI − A with c slightly above
/// λ_max, so Lanczos converges to the low end first. The (huge) kernel of A stays
/// invisible: the start vector is premultiplied by A and Krylov spaces of B
/// preserve range(A); a threshold on tiny Ritz values guards the remainder.
EigenResult solve_smallest(const MaxwellSystem& sys, int count, const LanczosOptions& opt = {});

/// Flags computed eigenvalues inside [lo, hi] with no analytic partner within
/// rtol (analytic values listed ascending, repeated per multiplicity, and each
/// entry absorbs at most one computed value).
struct SpuriousReport {
  std::vector<double> flagged;
  index_t checked = 0;
  index_t matched = 0;
};
SpuriousReport spurious_scan(const std::vector<double>& computed,
                             const std::vector<double>& analytic, double lo, double hi,
                             double rtol = 0.05);

}  // namespace dcm
