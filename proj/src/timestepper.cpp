#include "dcm/timestepper.hpp"

#include <cmath>
#include <random>
#include <string>

namespace dcm {

namespace {

void check_system(const MaxwellSystem& sys) {
  require(sys.curl.cols == sys.mass_e.dim, "curl columns do not match the electric mass");
  require(sys.curl.rows == sys.mass_h.dim, "curl rows do not match the magnetic mass");
  require(sys.mass_e.factorized() && sys.mass_h.factorized(),
          "mass matrices must be factorized before stepping");
}

void check_finite(const VectorX& e, const VectorX& h, index_t step) {
  if (e.allFinite() && h.allFinite()) return;
  throw Error("non-finite field detected at step " + std::to_string(step));
}

}  // namespace

double power_iteration_lambda_max(const MaxwellSystem& sys, std::uint64_t seed, double tol,
                                  int cap, int* iterations) {
  check_system(sys);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  VectorX u(sys.curl.rows);
  for (index_t i = 0; i < u.size(); ++i) u[i] = unit(rng);

  // Normalize in the M_mu inner product so the Rayleigh quotient is u' C Me^{-1} C' u.
  u /= std::sqrt(sys.mass_h.quadratic(u));
  double lambda = 0.0;
  VectorX ct(sys.curl.cols), v(sys.curl.rows);
  for (int it = 1; it <= cap; ++it) {
    sys.curl.multiply_transpose(u, ct);
    sys.mass_e.solve_in_place(ct);
    sys.curl.multiply(ct, v);
    double next = u.dot(v);
    require(std::isfinite(next) && next >= 0.0, "power iteration produced an invalid quotient");
    sys.mass_h.solve_in_place(v);
    double norm = std::sqrt(sys.mass_h.quadratic(v));
    require(norm > 0.0, "power iteration collapsed to the kernel");
    u = v / norm;
    if (it > 1 && std::abs(next - lambda) <= tol * std::abs(next)) {
      if (iterations) *iterations = it;
      return next;
    }
    lambda = next;
  }
  // Tight clusters at the top of the spectrum can leave the quotient crawling
  // below the change tolerance; the capped estimate is still accurate to far
  // better than the safety margins applied by callers, so hand it back.
  if (iterations) *iterations = cap;
  return lambda;
}

double cfl_max_timestep(const MaxwellSystem& sys, std::uint64_t seed, double tol, int cap) {
  return 2.0 / std::sqrt(power_iteration_lambda_max(sys, seed, tol, cap));
}

StrongInflow make_strong_inflow(const DofSpace& electric, const DualComplex& dual,
                                BoundaryConstraint constraint,
                                const std::function<bool(index_t)>& face_pred,
                                const std::function<bool(index_t)>& edge_pred,
                                std::function<Vec3(double, const Vec3&)> field) {
  require(electric.kind == FieldKind::Electric, "inflow data lives on the electric space");
  StrongInflow inflow;
  struct Sample {
    index_t dof;
    Vec3 point;
    Vec3 tangent;  // Jacobian column of the slot axis; coefficient = tangent . field
  };
  std::vector<Sample> samples;
  for (index_t c : constraint.constrained) {
    const DofInfo& info = electric.dofs[c];
    bool driven = (info.family == DofFamily::Face) ? face_pred(info.entity_a)
                                                   : edge_pred(info.entity_a);
    if (!driven) continue;
    const DofSlot& slot = info.slots.front();
    Vec3 xhat = electric.slot_node(slot.alpha);
    const Subcell& sc = dual.subcells[slot.subcell];
    samples.push_back({c, subcell_point(sc, xhat),
                       Vec3(subcell_jacobian(sc, xhat).col(slot.axis))});
    inflow.driven.push_back(c);
  }
  inflow.constraint = std::move(constraint);
  inflow.evaluate = [samples = std::move(samples), field = std::move(field)](
                        double t, VectorX& full_values) {
    for (const Sample& s : samples) full_values[s.dof] = s.tangent.dot(field(t, s.point));
  };
  return inflow;
}

Leapfrog::Leapfrog(const MaxwellSystem& sys, double dt, VectorX e0, VectorX h0,
                   std::optional<StrongInflow> inflow)
    : sys_(sys), dt_(dt), e_(std::move(e0)), h_(std::move(h0)), inflow_(std::move(inflow)) {
  check_system(sys_);
  require(dt_ > 0.0, "time step must be positive");
  require(e_.size() == sys_.curl.cols && h_.size() == sys_.curl.rows,
          "initial data does not match the system dimensions");
  if (inflow_) {
    reduced_ = constrain_mass(sys_.mass_e, inflow_->constraint);
    reduced_.reduced.factorize();
    bvals_ = VectorX::Zero(e_.size());
    inflow_->evaluate(0.0, bvals_);
    for (index_t c : inflow_->constraint.constrained) e_[c] = bvals_[c];
  }
  // Half step for h, plus the matching backward half step so staggered_energy()
  // reports the exact invariant already at step 0.
  VectorX w = sys_.mass_h.solve(sys_.curl.apply(e_));
  h_prev_ = h_ + (0.5 * dt_) * w;
  h_ -= (0.5 * dt_) * w;
}

void Leapfrog::advance() {
  VectorX g = sys_.curl.apply_transpose(h_);
  if (!inflow_) {
    e_ += dt_ * sys_.mass_e.solve(g);
  } else {
    VectorX bnew = VectorX::Zero(e_.size());
    inflow_->evaluate(time_ + dt_, bnew);
    VectorX delta = bnew - bvals_;
    const auto& bc = inflow_->constraint;
    VectorX rhs(bc.kept_count());
    for (index_t k = 0; k < bc.kept_count(); ++k) rhs[k] = dt_ * g[bc.kept[k]];
    rhs -= reduced_.coupling.apply(delta);
    reduced_.reduced.solve_in_place(rhs);
    for (index_t k = 0; k < bc.kept_count(); ++k) e_[bc.kept[k]] += rhs[k];
    for (index_t c : bc.constrained) e_[c] = bnew[c];
    bvals_.swap(bnew);
  }
  h_prev_ = h_;
  h_ -= dt_ * sys_.mass_h.solve(sys_.curl.apply(e_));
  ++step_;
  time_ += dt_;
  check_finite(e_, h_, step_);
}

void Leapfrog::advance(index_t steps) {
  for (index_t q = 0; q < steps; ++q) advance();
}

void Leapfrog::reverse() {
  // Mirror the staggering: the stored magnetic field must sit half a step ahead
  // of e in the new direction of travel, so the two half-step neighbours swap.
  dt_ = -dt_;
  h_.swap(h_prev_);
}

double Leapfrog::staggered_energy() const {
  VectorX me(e_.size()), mh(h_.size());
  sys_.mass_e.multiply(e_, me);
  sys_.mass_h.multiply(h_, mh);
  return e_.dot(me) + h_prev_.dot(mh);
}

double Leapfrog::field_energy() const {
  return sys_.mass_e.quadratic(e_) + sys_.mass_h.quadratic(h_);
}

PmlLeapfrog::PmlLeapfrog(const MaxwellSystem& sys, const PmlMatrices& pml, double sigma,
                         double dt, VectorX e0, VectorX h0, std::optional<StrongInflow> inflow)
    : sys_(sys),
      pml_(pml),
      sigma_(sigma),
      dt_(dt),
      e_(std::move(e0)),
      h_(std::move(h0)),
      inflow_(std::move(inflow)) {
  check_system(sys_);
  require(dt_ > 0.0, "time step must be positive");
  require(sigma_ >= 0.0, "damping strength must be nonnegative");
  require(e_.size() == sys_.curl.cols && h_.size() == sys_.curl.rows,
          "initial data does not match the system dimensions");
  require(pml_.mask_e.size() == e_.size() && pml_.mask_h.size() == h_.size(),
          "PML matrices do not match the system dimensions");
  if (inflow_) {
    reduced_ = constrain_mass(sys_.mass_e, inflow_->constraint);
    reduced_.reduced.factorize();
    bvals_ = VectorX::Zero(e_.size());
    inflow_->evaluate(0.0, bvals_);
    for (index_t c : inflow_->constraint.constrained) e_[c] = bvals_[c];
  }
  e_hat_ = VectorX::Zero(e_.size());
  h_hat_ = VectorX::Zero(h_.size());

  // Half step for the magnetic pair.
  VectorX rhs = -sys_.curl.apply(e_);
  if (sigma_ != 0.0) {
    rhs += sigma_ * pml_.damp_tilde_h.apply(h_);
    rhs -= sigma_ * pml_.damp_hat_h.apply(h_hat_);
  }
  VectorX hold = h_;
  h_ += (0.5 * dt_) * sys_.mass_h.solve(rhs);
  h_hat_ += (0.5 * dt_ * sigma_) * (pml_.mask_h.cwiseProduct(hold) - h_hat_);
}

void PmlLeapfrog::advance() {
  // Electric update from the old (e, e_hat) and the current half-step h.
  VectorX rhs_e = sys_.curl.apply_transpose(h_);
  if (sigma_ != 0.0) {
    rhs_e += sigma_ * pml_.damp_tilde_e.apply(e_);
    rhs_e -= sigma_ * pml_.damp_hat_e.apply(e_hat_);
  }
  VectorX e_old = e_;
  if (!inflow_) {
    e_ += dt_ * sys_.mass_e.solve(rhs_e);
  } else {
    VectorX bnew = VectorX::Zero(e_.size());
    inflow_->evaluate(time() + dt_, bnew);
    VectorX delta = bnew - bvals_;
    const auto& bc = inflow_->constraint;
    VectorX rhs(bc.kept_count());
    for (index_t k = 0; k < bc.kept_count(); ++k) rhs[k] = dt_ * rhs_e[bc.kept[k]];
    rhs -= reduced_.coupling.apply(delta);
    reduced_.reduced.solve_in_place(rhs);
    for (index_t k = 0; k < bc.kept_count(); ++k) e_[bc.kept[k]] += rhs[k];
    for (index_t c : bc.constrained) e_[c] = bnew[c];
    bvals_.swap(bnew);
  }
  e_hat_ += (dt_ * sigma_) * (pml_.mask_e.cwiseProduct(e_old) - e_hat_);

  // Magnetic update from the old (h, h_hat) and the fresh e.
  VectorX rhs_h = -sys_.curl.apply(e_);
  if (sigma_ != 0.0) {
    rhs_h += sigma_ * pml_.damp_tilde_h.apply(h_);
    rhs_h -= sigma_ * pml_.damp_hat_h.apply(h_hat_);
  }
  VectorX h_old = h_;
  h_ += dt_ * sys_.mass_h.solve(rhs_h);
  h_hat_ += (dt_ * sigma_) * (pml_.mask_h.cwiseProduct(h_old) - h_hat_);
  ++step_;
  check_finite(e_, h_, step_);
}

void PmlLeapfrog::advance(index_t steps) {
  for (index_t q = 0; q < steps; ++q) advance();
}

}  // namespace dcm
