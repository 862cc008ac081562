#include "dcm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

namespace dcm {

namespace {

// y = A x with A = L⁻¹ C Mε⁻¹ Cᵀ L⁻ᵀ, M_μ = L Lᵀ blockwise.
struct SymmetrizedPencil {
  const MaxwellSystem& sys;
  mutable VectorX g;  // electric scratch

  VectorX apply(const VectorX& x) const {
    VectorX h = x;
    sys.mass_h.solve_cholesky_lt(h);
    sys.curl.multiply_transpose(h, g);
    sys.mass_e.solve_in_place(g);
    VectorX y(sys.curl.rows);
    sys.curl.multiply(g, y);
    sys.mass_h.solve_cholesky_l(y);
    return y;
  }
};

VectorX random_vector(index_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  VectorX v(n);
  for (index_t i = 0; i < n; ++i) v[i] = unit(rng);
  return v;
}

// Two classical Gram-Schmidt passes against the first `cols` basis vectors;
// the first-pass coefficients (plus correction) are the projection entries.
void orthogonalize(const MatrixX& basis, int cols, VectorX& w, VectorX& coeffs) {
  coeffs = basis.leftCols(cols).transpose() * w;
  w.noalias() -= basis.leftCols(cols) * coeffs;
  VectorX second = basis.leftCols(cols).transpose() * w;
  w.noalias() -= basis.leftCols(cols) * second;
  coeffs += second;
}

}  // namespace

EigenResult solve_smallest(const MaxwellSystem& sys, int count, const LanczosOptions& opt) {
  require(count >= 1, "at least one eigenpair must be requested");
  const index_t n = sys.curl.rows;
  require(n >= 1, "empty system");

  EigenResult result;
  result.lambda_max = power_iteration_lambda_max(sys, opt.seed);
  const double shift = opt.shift_safety * result.lambda_max;
  const double kernel_floor = opt.kernel_rtol * result.lambda_max;

  SymmetrizedPencil op{sys, VectorX(sys.curl.cols)};
  std::mt19937_64 rng(opt.seed + 1);

  const int m = static_cast<int>(std::min<index_t>(opt.max_basis, n));
  require(m >= std::min<index_t>(n, count + 2), "Lanczos basis too small for the request");
  MatrixX basis(n, m + 1);
  MatrixX proj = MatrixX::Zero(m + 1, m + 1);

  // Start inside range(A); the kernel is invariant under polynomials of the
  // shifted operator, so it never surfaces from here.
  VectorX v;
  for (int attempt = 0; attempt < 8; ++attempt) {
    v = op.apply(random_vector(n, rng));
    double norm = v.norm();
    if (norm > 0.0) {
      v /= norm;
      break;
    }
    require(attempt + 1 < 8, "operator annihilated every start vector (zero curl?)");
  }
  basis.col(0) = v;

  int applied = 0;  // columns the operator has been applied to; col applied+1.. are unset
  bool exhausted = false;

  // Applies B to columns applied..target-1, extending the basis one column past
  // the last application (the residual direction).
  auto expand = [&](int target) {
    while (applied < target && !exhausted) {
      const int j = applied;
      VectorX w = shift * basis.col(j) - op.apply(basis.col(j));
      ++result.iterations;
      VectorX coeffs;
      orthogonalize(basis, j + 1, w, coeffs);
      proj.col(j).head(j + 1) = coeffs;
      proj.row(j).head(j + 1) = coeffs.transpose();
      double beta = w.norm();
      ++applied;
      if (beta > 1e-13 * shift) {
        basis.col(j + 1) = w / beta;
        proj(j + 1, j) = proj(j, j + 1) = beta;
        continue;
      }
      // Breakdown: the Krylov space closed. Try a fresh direction in range(A).
      bool replaced = false;
      for (int attempt = 0; attempt < 4 && !replaced; ++attempt) {
        VectorX r = op.apply(random_vector(n, rng));
        VectorX dummy;
        orthogonalize(basis, j + 1, r, dummy);
        double norm = r.norm();
        if (norm > 1e-10) {
          basis.col(j + 1) = r / norm;
          proj(j + 1, j) = proj(j, j + 1) = 0.0;
          replaced = true;
        }
      }
      if (!replaced) exhausted = true;  // range(A) fully spanned
    }
  };

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    expand(m);
    const int dim = applied;
    const double beta_last = exhausted ? 0.0 : proj(dim, dim - 1);

    Eigen::SelfAdjointEigenSolver<MatrixX> es(proj.topLeftCorner(dim, dim));
    require(es.info() == Eigen::Success, "projected eigenvalue solve failed");
    // Eigen returns ascending; the wanted pairs sit at the top (largest of B).
    const VectorX& theta = es.eigenvalues();
    const MatrixX& y = es.eigenvectors();

    struct Ritz {
      int col;
      double nu;
      double res;
    };
    std::vector<Ritz> wanted;
    for (int i = dim - 1; i >= 0 && static_cast<int>(wanted.size()) < count; --i) {
      double nu = shift - theta[i];
      if (nu < kernel_floor) continue;  // kernel guard
      wanted.push_back({i, nu, std::abs(beta_last * y(dim - 1, i))});
    }

    bool done = static_cast<int>(wanted.size()) == count || exhausted;
    if (done)
      for (const Ritz& r : wanted)
        if (r.res > opt.tol * shift) done = false;

    if (done || restart == opt.max_restarts) {
      require(done, "Lanczos did not converge within the restart budget");
      result.pairs.reserve(wanted.size());
      for (auto it = wanted.begin(); it != wanted.end(); ++it) {  // already ascending in ν
        EigenPair pair;
        pair.value = it->nu;
        VectorX hv = basis.leftCols(dim) * y.col(it->col);
        sys.mass_h.solve_cholesky_lt(hv);
        VectorX ke(sys.curl.cols);
        sys.curl.multiply_transpose(hv, ke);
        sys.mass_e.solve_in_place(ke);
        VectorX kh(n);
        sys.curl.multiply(ke, kh);  // kh = C Mε⁻¹ Cᵀ h
        VectorX mh(n);
        sys.mass_h.multiply(hv, mh);
        pair.residual = (kh - it->nu * mh).norm() / mh.norm();
        if (opt.want_vectors) {
          pair.h = std::move(hv);
          pair.e = ke / std::sqrt(it->nu);
        }
        result.pairs.push_back(std::move(pair));
      }
      return result;
    }

    // Thick restart: keep the best Ritz vectors plus the residual direction.
    ++result.restarts;
    int nkeep = std::min(dim - 2, std::max(2 * count, count + 8));
    MatrixX kept_vecs = basis.leftCols(dim) * y.rightCols(nkeep);
    VectorX arrows = beta_last * y.row(dim - 1).tail(nkeep).transpose();
    VectorX resid = basis.col(dim);
    basis.leftCols(nkeep) = kept_vecs;
    basis.col(nkeep) = resid;
    proj.setZero();
    for (int i = 0; i < nkeep; ++i) {
      proj(i, i) = theta[dim - nkeep + i];
      proj(i, nkeep) = proj(nkeep, i) = arrows[i];
    }
    applied = nkeep;
  }
  throw Error("unreachable: Lanczos restart loop exited");
}

SpuriousReport spurious_scan(const std::vector<double>& computed,
                             const std::vector<double>& analytic, double lo, double hi,
                             double rtol) {
  SpuriousReport report;
  std::vector<bool> used(analytic.size(), false);
  for (double v : computed) {
    if (v < lo || v > hi) continue;
    ++report.checked;
    int best = -1;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      if (used[i]) continue;
      double gap = std::abs(v - analytic[i]);
      if (gap < best_gap) {
        best_gap = gap;
        best = static_cast<int>(i);
      }
    }
    if (best >= 0 && best_gap <= rtol * analytic[best]) {
      used[best] = true;
      ++report.matched;
    } else {
      report.flagged.push_back(v);
    }
  }
  return report;
}

}  // namespace dcm
