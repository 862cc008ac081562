#pragma once

#include <Eigen/Cholesky>
#include <cstdint>
#include <functional>

#include "dcm/fespace.hpp"

namespace dcm {

/// 1D reference integrals pairing the electric tensor factors l_a(x) with the
/// reflected magnetic factors l_b(-x). `bplus` carries the subcell-boundary flux
/// fold-in; by the 1D integration-by-parts identity the reverse-direction bracket
/// is exactly -bplus^T, which assemble_curl_transpose uses so the global transpose
/// identity holds to the last bit.
struct CurlTables {
  MatrixX a;       // a(b,a) = ∫ l_b(-x) l_a(x) dx
  MatrixX b;       // b(b,a) = -∫ l_b'(-x) l_a(x) dx
  MatrixX d;       // d(a,b) = ∫ l_a'(x) l_b(-x) dx   (independent quadrature, for tests)
  VectorX e1;      // l_a(+1)
  MatrixX bplus;   // bplus(b,a) = b(b,a) + e1(b)·[a==0]
};
CurlTables build_curl_tables(const LagrangeBasis1D& basis, int quad_points = 0);

struct CsrMatrix {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<index_t> row_ptr;       // size rows+1
  std::vector<std::int32_t> col_idx;  // DOF counts stay far below 2^31
  std::vector<double> values;

  index_t nnz() const { return static_cast<index_t>(values.size()); }
  void multiply(const VectorX& x, VectorX& y) const;            // y = A x
  void multiply_transpose(const VectorX& x, VectorX& y) const;  // y = A^T x
  VectorX apply(const VectorX& x) const;
  VectorX apply_transpose(const VectorX& x) const;
  CsrMatrix transposed() const;
};

/// Discrete curl C (rows: magnetic DOFs, cols: electric DOFs). Entries come from
/// reference-cube tables only, so C never sees vertex coordinates.
CsrMatrix assemble_curl(const DofSpace& magnetic, const DofSpace& electric);
/// Independent assembly of the reverse pairing (rows: electric DOFs). Equals
/// assemble_curl(...).transposed() bit for bit.
CsrMatrix assemble_curl_transpose(const DofSpace& electric, const DofSpace& magnetic);

using MaterialFn = std::function<Mat3(index_t tet, const Vec3& x)>;
MaterialFn constant_material(double value);
MaterialFn constant_material(const Mat3& tensor);
/// Piecewise-constant isotropic material by mesh region tag.
MaterialFn region_material(const PrimalMesh& mesh, const std::vector<double>& value_by_region);

struct BlockDiagMatrix {
  index_t dim = 0;
  std::vector<std::array<index_t, 2>> ranges;
  std::vector<MatrixX> blocks;
  std::vector<Eigen::LLT<MatrixX>> factors;  // filled by factorize()

  bool factorized() const { return !factors.empty(); }
  void factorize();  // Cholesky per block; throws on a non-SPD block
  void multiply(const VectorX& x, VectorX& y) const;
  VectorX apply(const VectorX& x) const;
  void solve_in_place(VectorX& x) const;
  VectorX solve(const VectorX& x) const;
  // Triangular pieces of M = L L^T for symmetrized operators.
  void multiply_cholesky_lt(const VectorX& x, VectorX& y) const;  // y = L^T x
  void solve_cholesky_l(VectorX& x) const;                        // x <- L^{-1} x
  void solve_cholesky_lt(VectorX& x) const;                       // x <- L^{-T} x
  double quadratic(const VectorX& x) const;                       // x^T M x
  index_t nonzero_count() const;  // exact zeros inside blocks not counted
};

/// Lumped mass: tensor Gauss-Radau collocation at the space's own nodes; couples
/// only the slots sharing a collocation node, giving tiny blocks (class_ranges).
/// Blocks are factorized eagerly; material samples are checked SPD.
BlockDiagMatrix assemble_lumped_mass(const DofSpace& space, const DualComplex& dual,
                                     const MaterialFn& material);
/// Consistent mass: dense per-owner blocks (dual cell / tet), integrated with a
/// higher-order Gauss-Radau rule (reflected for the magnetic space).
BlockDiagMatrix assemble_consistent_mass(const DofSpace& space, const DualComplex& dual,
                                         const MaterialFn& material, int quad_points = 0);

/// Lumped-quadrature matrix restricted to the subcells of selected tets (not
/// factorized); used for region-wise energies.
BlockDiagMatrix assemble_lumped_restricted(const DofSpace& space, const DualComplex& dual,
                                           const MaterialFn& material,
                                           const std::function<bool(index_t)>& tet_filter);

/// Drops the columns mapped to -1; keeps values and row structure otherwise.
CsrMatrix restrict_columns(const CsrMatrix& m, const std::vector<index_t>& full_to_kept,
                           index_t kept_count);

struct PmlSpec {
  int axis = 0;                                   // damped axis
  std::vector<std::array<double, 2>> intervals;   // damped slabs on that axis
  double sigma = 5.0;

  bool contains(double coord) const {
    for (const auto& iv : intervals)
      if (coord >= iv[0] && coord <= iv[1]) return true;
    return false;
  }
};

struct PmlMatrices {
  BlockDiagMatrix damp_tilde_e;  // integrand Π1 - Π1⊥, electric space
  BlockDiagMatrix damp_hat_e;    // integrand Π1
  BlockDiagMatrix damp_tilde_h;
  BlockDiagMatrix damp_hat_h;
  std::vector<index_t> restrict_e;  // DOFs with support meeting Ω_pml, ascending
  std::vector<index_t> restrict_h;
  VectorX mask_e;  // 0/1 expansion of the restriction (R^T R)
  VectorX mask_h;
};

/// Tags tets as PML by barycentre; a tet straddling the interval boundary is an error
/// (the PML region must be a union of whole tets).
PmlMatrices assemble_pml(const DofSpace& electric, const DofSpace& magnetic,
                         const PrimalMesh& mesh, const DualComplex& dual, const PmlSpec& pml);

/// Reduction of a block-diagonal matrix to the kept DOFs plus the kept-row ×
/// constrained-column coupling block (for strong inhomogeneous boundary data).
struct ConstrainedMass {
  BlockDiagMatrix reduced;  // kept × kept (not factorized)
  CsrMatrix coupling;       // kept × full dim; nonzero only in constrained columns
};
ConstrainedMass constrain_mass(const BlockDiagMatrix& mass, const BoundaryConstraint& bc);

}  // namespace dcm
