#pragma once

#include <optional>

#include "dcm/assembly.hpp"

namespace dcm {

/// Operators of one discretization, ready for explicit stepping. For cavity-type
/// runs `curl` has its electric columns restricted to the unconstrained DOFs; for
/// driven runs it spans the full electric space and a StrongInflow supplies the
/// constrained values.
struct MaxwellSystem {
  CsrMatrix curl;          // magnetic rows × electric columns
  BlockDiagMatrix mass_e;  // lumped, factorized
  BlockDiagMatrix mass_h;  // lumped, factorized
};

/// Largest eigenvalue of C M_ε⁻¹ Cᵀ u = λ M_μ u by power iteration on
/// M_μ⁻¹ C M_ε⁻¹ Cᵀ with the M_μ Rayleigh quotient. Stops when the quotient's
/// relative change drops below tol or after cap iterations, whichever comes
/// first (clustered spectra legitimately exhaust the cap; the estimate is
/// still sharp at the tolerances callers rely on).
double power_iteration_lambda_max(const MaxwellSystem& sys, std::uint64_t seed = 20240901,
                                  double tol = 1e-8, int cap = 5000, int* iterations = nullptr);

/// Strict stability bound 2/√λ_M (callers apply their own safety factor).
double cfl_max_timestep(const MaxwellSystem& sys, std::uint64_t seed = 20240901,
                        double tol = 1e-8, int cap = 5000);

/// Time-dependent strong data on constrained electric DOFs. `driven` lists the
/// DOFs with nonzero prescription; everything else constrained is held at zero.
struct StrongInflow {
  BoundaryConstraint constraint;
  std::vector<index_t> driven;
  std::function<void(double t, VectorX& full_values)> evaluate;  // writes driven entries
};

/// Builds the inflow for a tangential field prescribed on conformity entities
/// selected by the face/edge predicates (entities must be constrained).
StrongInflow make_strong_inflow(const DofSpace& electric, const DualComplex& dual,
                                BoundaryConstraint constraint,
                                const std::function<bool(index_t)>& face_pred,
                                const std::function<bool(index_t)>& edge_pred,
                                std::function<Vec3(double, const Vec3&)> field);

class Leapfrog {
 public:
  /// Takes e at t=0 and h at t=0, performs the initial half step for h.
  Leapfrog(const MaxwellSystem& sys, double dt, VectorX e0, VectorX h0,
           std::optional<StrongInflow> inflow = std::nullopt);
  void advance();  // one full step; throws on NaN/Inf with the step number
  void advance(index_t steps);
  /// Flips the stepping direction; the scheme is its own inverse, so Q steps
  /// forward followed by Q steps backward restore the initial state (up to
  /// roundoff).  Calling it twice is a no-op.
  void reverse();

  const VectorX& e() const { return e_; }
  const VectorX& h() const { return h_; }  // half a step ahead of e
  double time() const { return time_; }
  index_t step() const { return step_; }
  /// e^qᵀ M_ε e^q + h^{q-1/2 ᵀ} M_μ h^{q+1/2}; exact invariant (valid once step ≥ 1).
  double staggered_energy() const;
  /// Positive-definite proxy e'Me + h'M̃h for blow-up detection.
  double field_energy() const;

 private:
  const MaxwellSystem& sys_;
  double dt_;
  double time_ = 0.0;
  index_t step_ = 0;
  VectorX e_, h_, h_prev_;
  std::optional<StrongInflow> inflow_;
  ConstrainedMass reduced_;  // only with inflow
  VectorX bvals_;            // current prescribed values (full size)
};

/// Leap-frog for the damped PML system; follows the printed six-update scheme,
/// auxiliary fields stored full-length and masked by the restrictions.
class PmlLeapfrog {
 public:
  PmlLeapfrog(const MaxwellSystem& sys, const PmlMatrices& pml, double sigma, double dt,
              VectorX e0, VectorX h0, std::optional<StrongInflow> inflow = std::nullopt);
  void advance();
  void advance(index_t steps);

  const VectorX& e() const { return e_; }
  const VectorX& h() const { return h_; }
  const VectorX& e_hat() const { return e_hat_; }
  const VectorX& h_hat() const { return h_hat_; }
  double time() const { return static_cast<double>(step_) * dt_; }
  index_t step() const { return step_; }

 private:
  const MaxwellSystem& sys_;
  const PmlMatrices& pml_;
  double sigma_, dt_;
  index_t step_ = 0;
  VectorX e_, h_, e_hat_, h_hat_;
  std::optional<StrongInflow> inflow_;
  ConstrainedMass reduced_;
  VectorX bvals_;
};

}  // namespace dcm
