#pragma once

#include <functional>
#include <vector>

#include "dcm/core.hpp"

namespace dcm {

/// Resonance values (squared frequencies, c = 1) of the PEC box (0,a)×(0,b)×(0,c):
/// λ = (mπ/a)² + (nπ/b)² + (pπ/c)², TM needs m,n ≥ 1, p ≥ 0, TE needs p ≥ 1 and
/// (m,n) ≠ (0,0); a mode admissible as both contributes twice. Ascending, with
/// multiplicity, all values ≤ max_value.
std::vector<double> cavity_eigenvalues(const Vec3& box, double max_value);

/// Electric eigenfunction of the TM(m,n,0) mode: E = (0,0, sin(mπx/a) sin(nπy/b)).
std::function<Vec3(const Vec3&)> cavity_tm_field(const Vec3& box, int m, int n);

/// J₁ by long-double power series up to |x| = 16 and the Hankel asymptotic
/// expansion beyond; absolute error stays below 1e-12 everywhere.
double bessel_j1(double x);
/// J₁(x)/x, an even entire function (value 1/2 at the origin).
double bessel_j1_over_x(double x);

/// Inflow pulse: exp(-5(1-t)²) sin(10t) for t > 0, zero otherwise.
double inflow_pulse(double t);

/// Transverse profile amplitude u(t,x) of the driven semi-infinite waveguide:
///   ∂²u/∂t² = ∂²u/∂x² - κ²u,   u(t,0) = inflow pulse, rest initial data,
/// via the closed form u = e₀(t-x) - κ²x ∫ₓᵗ e₀(t-τ) (J₁/z)(κ√(τ²-x²)) dτ
/// (zero ahead of the front t < x). Adaptive 16-point Gauss panels, absolute
/// tolerance `tol`; throws if the subdivision limit cannot reach it.
double waveguide_exact(double t, double x, double kappa, double tol = 1e-10);

/// Dense sampling of u(t,·) on [0, x_max] for cheap repeated evaluation. Smooth
/// regions interpolate with a 6-point stencil; points near the wave front fall
/// back to direct quadrature so the kink costs no accuracy.
class WaveguideSnapshot {
 public:
  WaveguideSnapshot(double t, double kappa, double x_max, index_t samples,
                    double tol = 1e-10);
  double eval(double x) const;
  double time() const { return t_; }

 private:
  double t_, kappa_, x_max_, dx_, tol_;
  std::vector<double> values_;
};

}  // namespace dcm
