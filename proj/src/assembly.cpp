#include "dcm/assembly.hpp"

#include <algorithm>

#include "dcm/parallel.hpp"

namespace dcm {
namespace {

double levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0.0;
  return ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;  // cyclic (i,j,k) -> +1
}

void check_spd3(const Mat3& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
    throw Error("material tensor not symmetric");
  Eigen::LLT<Mat3> llt(m);
  if (llt.info() != Eigen::Success) throw Error("material tensor not positive definite");
}

}  // namespace

CurlTables build_curl_tables(const LagrangeBasis1D& basis, int quad_points) {
  const int n = basis.size();
  if (quad_points <= 0) quad_points = n + 1;  // exact beyond degree 2P+1
  QuadratureRule1D q = gauss_legendre(quad_points);
  CurlTables t;
  t.a = MatrixX::Zero(n, n);
  t.b = MatrixX::Zero(n, n);
  t.d = MatrixX::Zero(n, n);
  t.e1 = VectorX(n);
  for (int a = 0; a < n; ++a) t.e1[a] = basis.evaluate(a, 1.0);
  for (int g = 0; g < q.size(); ++g) {
    double x = q.nodes[g], w = q.weights[g];
    VectorX lp(n), lm(n), dp(n), dm(n);
    for (int a = 0; a < n; ++a) {
      lp[a] = basis.evaluate(a, x);
      lm[a] = basis.evaluate(a, -x);
      dp[a] = basis.derivative(a, x);
      dm[a] = basis.derivative(a, -x);
    }
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        t.a(b, a) += w * lm[b] * lp[a];
        t.b(b, a) -= w * dm[b] * lp[a];
        t.d(a, b) += w * dp[a] * lm[b];
      }
  }
  t.bplus = t.b;
  for (int b = 0; b < n; ++b) t.bplus(b, 0) += t.e1[b];
  return t;
}

void CsrMatrix::multiply(const VectorX& x, VectorX& y) const {
  require(x.size() == cols, "dimension mismatch in CSR multiply");
  y.resize(rows);
  parallel_for(
      rows,
      [&](index_t begin, index_t end) {
        for (index_t r = begin; r < end; ++r) {
          double acc = 0.0;
          for (index_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            acc += values[k] * x[col_idx[k]];
          y[r] = acc;
        }
      },
      256);
}

void CsrMatrix::multiply_transpose(const VectorX& x, VectorX& y) const {
  require(x.size() == rows, "dimension mismatch in CSR transpose multiply");
  // Sequential scatter: keeps results independent of the thread count. The time
  // loop is memory-bound anyway, so a parallel gather would need a transposed
  // copy that doubles the footprint of the largest runs.
  y = VectorX::Zero(cols);
  for (index_t r = 0; r < rows; ++r) {
    double xr = x[r];
    if (xr == 0.0) continue;
    for (index_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) y[col_idx[k]] += values[k] * xr;
  }
}

VectorX CsrMatrix::apply(const VectorX& x) const {
  VectorX y;
  multiply(x, y);
  return y;
}

VectorX CsrMatrix::apply_transpose(const VectorX& x) const {
  VectorX y;
  multiply_transpose(x, y);
  return y;
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (std::int32_t c : col_idx) ++t.row_ptr[c + 1];
  for (index_t r = 0; r < cols; ++r) t.row_ptr[r + 1] += t.row_ptr[r];
  t.col_idx.resize(nnz());
  t.values.resize(nnz());
  std::vector<index_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (index_t r = 0; r < rows; ++r)
    for (index_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      index_t pos = cursor[col_idx[k]]++;
      t.col_idx[pos] = static_cast<std::int32_t>(r);
      t.values[pos] = values[k];
    }
  return t;
}

namespace {

// Shared two-pass row-parallel CSR builder. row_fn must append (col, value) pairs
// for one row; pairs are sorted and exact zeros dropped, so reruns are bit-stable.
template <typename RowFn>
CsrMatrix build_csr(index_t rows, index_t cols, const RowFn& row_fn) {
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);

  parallel_for(
      rows,
      [&](index_t begin, index_t end) {
        std::vector<std::pair<std::int32_t, double>> buf;
        for (index_t r = begin; r < end; ++r) {
          buf.clear();
          row_fn(r, buf);
          index_t cnt = 0;
          std::stable_sort(buf.begin(), buf.end(),
                           [](const auto& a, const auto& b) { return a.first < b.first; });
          for (std::size_t k = 0; k < buf.size();) {
            double acc = buf[k].second;
            std::size_t j = k + 1;
            while (j < buf.size() && buf[j].first == buf[k].first) acc += buf[j++].second;
            if (acc != 0.0) ++cnt;
            k = j;
          }
          m.row_ptr[r + 1] = cnt;
        }
      },
      64);
  for (index_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  m.col_idx.resize(m.row_ptr[rows]);
  m.values.resize(m.row_ptr[rows]);

  parallel_for(
      rows,
      [&](index_t begin, index_t end) {
        std::vector<std::pair<std::int32_t, double>> buf;
        for (index_t r = begin; r < end; ++r) {
          buf.clear();
          row_fn(r, buf);
          std::stable_sort(buf.begin(), buf.end(),
                           [](const auto& a, const auto& b) { return a.first < b.first; });
          index_t pos = m.row_ptr[r];
          for (std::size_t k = 0; k < buf.size();) {
            double acc = buf[k].second;
            std::size_t j = k + 1;
            while (j < buf.size() && buf[j].first == buf[k].first) acc += buf[j++].second;
            if (acc != 0.0) {
              m.col_idx[pos] = buf[k].first;
              m.values[pos] = acc;
              ++pos;
            }
            k = j;
          }
        }
      },
      64);
  return m;
}

}  // namespace

CsrMatrix assemble_curl(const DofSpace& magnetic, const DofSpace& electric) {
  require(magnetic.kind == FieldKind::Magnetic && electric.kind == FieldKind::Electric,
          "assemble_curl expects (magnetic, electric)");
  require(magnetic.subcell_count == electric.subcell_count && magnetic.order == electric.order,
          "spaces built over different subcell sets");
  const CurlTables t = build_curl_tables(magnetic.basis);
  const int n1 = magnetic.nodes_per_axis();
  const int n3 = n1 * n1 * n1;

  return build_csr(magnetic.size(), electric.size(),
                   [&](index_t m, std::vector<std::pair<std::int32_t, double>>& out) {
                     for (const DofSlot& s : magnetic.dofs[m].slots) {
                       auto [b0, b1, b2] = tensor_unpack(n1, s.alpha);
                       const std::array<int, 3> bt{b0, b1, b2};
                       for (int i = 0; i < 3; ++i) {
                         if (i == s.axis) continue;
                         const int a3 = 3 - i - s.axis;
                         const double eps = levi_civita(i, a3, s.axis);
                         for (int al = 0; al < n3; ++al) {
                           auto [a0, a1, a2] = tensor_unpack(n1, al);
                           const std::array<int, 3> at{a0, a1, a2};
                           double w = t.a(bt[i], at[i]);
                           w *= t.a(bt[s.axis], at[s.axis]);
                           w *= t.bplus(bt[a3], at[a3]);
                           out.emplace_back(
                               static_cast<std::int32_t>(electric.slot_dof(s.subcell, i, al)),
                               eps * w);
                         }
                       }
                     }
                   });
}

CsrMatrix assemble_curl_transpose(const DofSpace& electric, const DofSpace& magnetic) {
  require(magnetic.kind == FieldKind::Magnetic && electric.kind == FieldKind::Electric,
          "assemble_curl_transpose expects (electric, magnetic)");
  require(magnetic.subcell_count == electric.subcell_count && magnetic.order == electric.order,
          "spaces built over different subcell sets");
  const CurlTables t = build_curl_tables(electric.basis);
  const int n1 = electric.nodes_per_axis();
  const int n3 = n1 * n1 * n1;

  return build_csr(electric.size(), magnetic.size(),
                   [&](index_t n, std::vector<std::pair<std::int32_t, double>>& out) {
                     for (const DofSlot& s : electric.dofs[n].slots) {
                       auto [a0, a1, a2] = tensor_unpack(n1, s.alpha);
                       const std::array<int, 3> at{a0, a1, a2};
                       for (int it = 0; it < 3; ++it) {
                         if (it == s.axis) continue;
                         const int a3 = 3 - it - s.axis;
                         const double eps = levi_civita(s.axis, a3, it);
                         for (int be = 0; be < n3; ++be) {
                           auto [b0, b1, b2] = tensor_unpack(n1, be);
                           const std::array<int, 3> bt{b0, b1, b2};
                           // (D - E1·δ) equals -bplus^T exactly, by 1D integration
                           // by parts; using it keeps the transpose identity bitwise
                           double w = t.a(bt[s.axis], at[s.axis]);
                           w *= t.a(bt[it], at[it]);
                           w *= -t.bplus(bt[a3], at[a3]);
                           out.emplace_back(
                               static_cast<std::int32_t>(magnetic.slot_dof(s.subcell, it, be)),
                               -eps * w);
                         }
                       }
                     }
                   });
}

MaterialFn constant_material(double value) {
  Mat3 m = value * Mat3::Identity();
  return [m](index_t, const Vec3&) { return m; };
}

MaterialFn constant_material(const Mat3& tensor) {
  return [tensor](index_t, const Vec3&) { return tensor; };
}

MaterialFn region_material(const PrimalMesh& mesh, const std::vector<double>& value_by_region) {
  std::vector<int> regions = mesh.regions;
  return [regions, value_by_region](index_t tet, const Vec3&) {
    index_t r = regions[tet];
    require(r >= 0 && r < static_cast<index_t>(value_by_region.size()),
            "tet region without material value");
    return Mat3(value_by_region[r] * Mat3::Identity());
  };
}

void BlockDiagMatrix::factorize() {
  factors.clear();
  factors.reserve(blocks.size());
  for (const MatrixX& b : blocks) {
    factors.emplace_back(b);
    if (factors.back().info() != Eigen::Success) throw Error("mass block not positive definite");
  }
}

void BlockDiagMatrix::multiply(const VectorX& x, VectorX& y) const {
  require(x.size() == dim, "dimension mismatch in block multiply");
  y.resize(dim);
  parallel_for(
      static_cast<index_t>(blocks.size()),
      [&](index_t begin, index_t end) {
        for (index_t b = begin; b < end; ++b) {
          auto [lo, hi] = ranges[b];
          y.segment(lo, hi - lo).noalias() = blocks[b] * x.segment(lo, hi - lo);
        }
      },
      64);
}

VectorX BlockDiagMatrix::apply(const VectorX& x) const {
  VectorX y;
  multiply(x, y);
  return y;
}

void BlockDiagMatrix::solve_in_place(VectorX& x) const {
  require(factorized(), "block matrix not factorized");
  require(x.size() == dim, "dimension mismatch in block solve");
  parallel_for(
      static_cast<index_t>(blocks.size()),
      [&](index_t begin, index_t end) {
        for (index_t b = begin; b < end; ++b) {
          auto [lo, hi] = ranges[b];
          auto seg = x.segment(lo, hi - lo);
          factors[b].solveInPlace(seg);
        }
      },
      64);
}

VectorX BlockDiagMatrix::solve(const VectorX& x) const {
  VectorX y = x;
  solve_in_place(y);
  return y;
}

void BlockDiagMatrix::multiply_cholesky_lt(const VectorX& x, VectorX& y) const {
  require(factorized(), "block matrix not factorized");
  y.resize(dim);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto [lo, hi] = ranges[b];
    y.segment(lo, hi - lo).noalias() =
        factors[b].matrixU() * x.segment(lo, hi - lo);
  }
}

void BlockDiagMatrix::solve_cholesky_l(VectorX& x) const {
  require(factorized(), "block matrix not factorized");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto [lo, hi] = ranges[b];
    auto seg = x.segment(lo, hi - lo);
    factors[b].matrixL().solveInPlace(seg);
  }
}

void BlockDiagMatrix::solve_cholesky_lt(VectorX& x) const {
  require(factorized(), "block matrix not factorized");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto [lo, hi] = ranges[b];
    auto seg = x.segment(lo, hi - lo);
    factors[b].matrixU().solveInPlace(seg);
  }
}

double BlockDiagMatrix::quadratic(const VectorX& x) const {
  require(x.size() == dim, "dimension mismatch in quadratic form");
  double acc = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto [lo, hi] = ranges[b];
    acc += x.segment(lo, hi - lo).dot(blocks[b] * x.segment(lo, hi - lo));
  }
  return acc;
}

index_t BlockDiagMatrix::nonzero_count() const {
  index_t n = 0;
  for (const MatrixX& b : blocks) n += (b.array() != 0.0).count();
  return n;
}

namespace {

// Collocation-type assembly over class blocks with an arbitrary (possibly
// indefinite) pointwise matrix integrand; shared by lumped mass and PML damping.
BlockDiagMatrix assemble_collocated(const DofSpace& space, const DualComplex& dual,
                                    const MaterialFn& material, bool check_spd,
                                    const std::function<bool(index_t)>& subcell_filter) {
  BlockDiagMatrix m;
  m.dim = space.size();
  m.ranges = space.class_ranges;
  m.blocks.reserve(m.ranges.size());
  for (auto [lo, hi] : m.ranges) m.blocks.emplace_back(MatrixX::Zero(hi - lo, hi - lo));

  const int n1 = space.nodes_per_axis();
  const int n3 = n1 * n1 * n1;
  const auto& w = space.node_rule.weights;

  for (index_t k = 0; k < space.subcell_count; ++k) {
    if (subcell_filter && !subcell_filter(k)) continue;
    const Subcell& sc = dual.subcells[k];
    for (int al = 0; al < n3; ++al) {
      auto [a0, a1, a2] = tensor_unpack(n1, al);
      Vec3 xhat = space.slot_node(al);
      Mat3 J = subcell_jacobian(sc, xhat);
      double det = J.determinant();
      require(det > 0.0, "inverted subcell");
      Mat3 mat = material(sc.tet, subcell_point(sc, xhat));
      if (check_spd) check_spd3(mat);
      Mat3 Jinv = J.inverse();
      Mat3 G = (w[a0] * w[a1] * w[a2] * det) * (Jinv * mat * Jinv.transpose());
      index_t d[3];
      for (int i = 0; i < 3; ++i) d[i] = space.slot_dof(k, i, al);
      index_t cls = space.dofs[d[0]].lumped_class;
      index_t base = space.class_ranges[cls][0];
      MatrixX& blk = m.blocks[cls];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) blk(d[i] - base, d[j] - base) += G(i, j);
    }
  }
  return m;
}

}  // namespace

BlockDiagMatrix assemble_lumped_mass(const DofSpace& space, const DualComplex& dual,
                                     const MaterialFn& material) {
  BlockDiagMatrix m = assemble_collocated(space, dual, material, true, nullptr);
  m.factorize();
  return m;
}

BlockDiagMatrix assemble_consistent_mass(const DofSpace& space, const DualComplex& dual,
                                         const MaterialFn& material, int quad_points) {
  if (quad_points <= 0) quad_points = space.order + 4;
  QuadratureRule1D q = gauss_radau(quad_points - 1);  // Radau family, like the nodal rule
  const double reflect = (space.kind == FieldKind::Electric) ? 1.0 : -1.0;

  BlockDiagMatrix m;
  m.dim = space.size();
  m.ranges = space.owner_ranges;
  m.blocks.reserve(m.ranges.size());
  for (auto [lo, hi] : m.ranges) m.blocks.emplace_back(MatrixX::Zero(hi - lo, hi - lo));

  const int n1 = space.nodes_per_axis();
  const int n3 = n1 * n1 * n1;
  const int nq = q.size();

  // 1D basis values at the quadrature nodes (reflected grid for magnetic)
  MatrixX vals(nq, n1);
  for (int g = 0; g < nq; ++g)
    for (int a = 0; a < n1; ++a) vals(g, a) = space.basis.evaluate(a, q.nodes[g]);

  for (index_t k = 0; k < space.subcell_count; ++k) {
    const Subcell& sc = dual.subcells[k];
    index_t owner = (space.kind == FieldKind::Electric) ? sc.node : sc.tet;
    index_t base = space.owner_ranges[owner][0];
    MatrixX& blk = m.blocks[owner];

    std::array<std::vector<index_t>, 3> rows;
    for (int i = 0; i < 3; ++i) {
      rows[i].resize(n3);
      for (int al = 0; al < n3; ++al) rows[i][al] = space.slot_dof(k, i, al) - base;
    }

    VectorX s(n3);
    for (int g0 = 0; g0 < nq; ++g0)
      for (int g1 = 0; g1 < nq; ++g1)
        for (int g2 = 0; g2 < nq; ++g2) {
          Vec3 xhat{reflect * q.nodes[g0], reflect * q.nodes[g1], reflect * q.nodes[g2]};
          Mat3 J = subcell_jacobian(sc, xhat);
          double det = J.determinant();
          require(det > 0.0, "inverted subcell");
          Mat3 mat = material(sc.tet, subcell_point(sc, xhat));
          check_spd3(mat);
          Mat3 Jinv = J.inverse();
          double wq = q.weights[g0] * q.weights[g1] * q.weights[g2];
          Mat3 G = (wq * det) * (Jinv * mat * Jinv.transpose());
          for (int al = 0; al < n3; ++al) {
            auto [a0, a1, a2] = tensor_unpack(n1, al);
            s[al] = vals(g0, a0) * vals(g1, a1) * vals(g2, a2);
          }
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              double gij = G(i, j);
              if (gij == 0.0) continue;
              for (int al = 0; al < n3; ++al) {
                double si = gij * s[al];
                for (int be = 0; be < n3; ++be)
                  blk(rows[i][al], rows[j][be]) += si * s[be];
              }
            }
        }
  }
  return m;
}

BlockDiagMatrix assemble_lumped_restricted(const DofSpace& space, const DualComplex& dual,
                                           const MaterialFn& material,
                                           const std::function<bool(index_t)>& tet_filter) {
  return assemble_collocated(space, dual, material, false,
                             [&](index_t k) { return tet_filter(dual.subcells[k].tet); });
}

CsrMatrix restrict_columns(const CsrMatrix& m, const std::vector<index_t>& full_to_kept,
                           index_t kept_count) {
  require(static_cast<index_t>(full_to_kept.size()) == m.cols,
          "column map does not match matrix");
  CsrMatrix r;
  r.rows = m.rows;
  r.cols = kept_count;
  r.row_ptr.assign(m.rows + 1, 0);
  for (index_t row = 0; row < m.rows; ++row) {
    index_t cnt = 0;
    for (index_t k = m.row_ptr[row]; k < m.row_ptr[row + 1]; ++k)
      if (full_to_kept[m.col_idx[k]] >= 0) ++cnt;
    r.row_ptr[row + 1] = r.row_ptr[row] + cnt;
  }
  r.col_idx.resize(r.row_ptr[m.rows]);
  r.values.resize(r.row_ptr[m.rows]);
  index_t pos = 0;
  for (index_t row = 0; row < m.rows; ++row)
    for (index_t k = m.row_ptr[row]; k < m.row_ptr[row + 1]; ++k) {
      index_t c = full_to_kept[m.col_idx[k]];
      if (c >= 0) {
        r.col_idx[pos] = static_cast<std::int32_t>(c);
        r.values[pos] = m.values[k];
        ++pos;
      }
    }
  return r;
}

PmlMatrices assemble_pml(const DofSpace& electric, const DofSpace& magnetic,
                         const PrimalMesh& mesh, const DualComplex& dual, const PmlSpec& pml) {
  require(pml.axis >= 0 && pml.axis < 3, "PML axis out of range");
  require(pml.sigma >= 0.0, "PML sigma must be nonnegative");

  const index_t T = static_cast<index_t>(mesh.tets.size());
  std::vector<char> tet_in_pml(T, 0);
  double scale = 0.0;
  for (const auto& v : mesh.vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * (1.0 + scale);
  for (index_t t = 0; t < T; ++t) {
    double lo = mesh.vertices[mesh.tets[t][0]][pml.axis], hi = lo;
    for (index_t v : mesh.tets[t]) {
      double c = mesh.vertices[v][pml.axis];
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    // A tet may touch a damped slab only if it lies entirely inside it.
    bool inside = false;
    for (const auto& iv : pml.intervals) {
      double overlap = std::min(hi, iv[1]) - std::max(lo, iv[0]);
      if (overlap <= tol) continue;
      require(lo >= iv[0] - tol && hi <= iv[1] + tol,
              "PML region not aligned with tet boundaries");
      inside = true;
    }
    tet_in_pml[t] = inside ? 1 : 0;
  }

  Mat3 proj = Mat3::Zero();
  proj(pml.axis, pml.axis) = 1.0;
  Mat3 tilde = 2.0 * proj - Mat3::Identity();  // Π1 - Π1⊥
  auto filter = [&](index_t k) { return tet_in_pml[dual.subcells[k].tet] != 0; };

  PmlMatrices out;
  out.damp_tilde_e = assemble_collocated(electric, dual, constant_material(tilde), false, filter);
  out.damp_hat_e = assemble_collocated(electric, dual, constant_material(proj), false, filter);
  out.damp_tilde_h = assemble_collocated(magnetic, dual, constant_material(tilde), false, filter);
  out.damp_hat_h = assemble_collocated(magnetic, dual, constant_material(proj), false, filter);

  auto build_restriction = [&](const DofSpace& sp, std::vector<index_t>& list, VectorX& mask) {
    mask = VectorX::Zero(sp.size());
    for (index_t n = 0; n < sp.size(); ++n)
      for (const DofSlot& s : sp.dofs[n].slots)
        if (tet_in_pml[dual.subcells[s.subcell].tet]) {
          list.push_back(n);
          mask[n] = 1.0;
          break;
        }
  };
  build_restriction(electric, out.restrict_e, out.mask_e);
  build_restriction(magnetic, out.restrict_h, out.mask_h);
  return out;
}

ConstrainedMass constrain_mass(const BlockDiagMatrix& mass, const BoundaryConstraint& bc) {
  require(mass.dim == static_cast<index_t>(bc.full_to_kept.size()),
          "constraint does not match matrix dimension");
  ConstrainedMass out;
  out.reduced.dim = bc.kept_count();

  out.coupling.rows = bc.kept_count();
  out.coupling.cols = mass.dim;
  out.coupling.row_ptr.assign(bc.kept_count() + 1, 0);

  for (std::size_t b = 0; b < mass.blocks.size(); ++b) {
    auto [lo, hi] = mass.ranges[b];
    std::vector<index_t> kept_local, dropped_local;
    for (index_t f = lo; f < hi; ++f)
      (bc.full_to_kept[f] >= 0 ? kept_local : dropped_local).push_back(f - lo);
    if (kept_local.empty()) continue;
    index_t nk = static_cast<index_t>(kept_local.size());
    MatrixX blk(nk, nk);
    for (index_t r = 0; r < nk; ++r)
      for (index_t c = 0; c < nk; ++c) blk(r, c) = mass.blocks[b](kept_local[r], kept_local[c]);
    index_t new_lo = bc.full_to_kept[lo + kept_local.front()];
    out.reduced.ranges.push_back({new_lo, new_lo + nk});
    out.reduced.blocks.push_back(std::move(blk));
    for (index_t r = 0; r < nk; ++r) {
      index_t cnt = 0;
      for (index_t c : dropped_local)
        if (mass.blocks[b](kept_local[r], c) != 0.0) ++cnt;
      out.coupling.row_ptr[new_lo + r + 1] = cnt;
    }
  }
  for (index_t r = 0; r < out.coupling.rows; ++r) out.coupling.row_ptr[r + 1] += out.coupling.row_ptr[r];
  out.coupling.col_idx.resize(out.coupling.row_ptr[out.coupling.rows]);
  out.coupling.values.resize(out.coupling.row_ptr[out.coupling.rows]);
  for (std::size_t b = 0; b < mass.blocks.size(); ++b) {
    auto [lo, hi] = mass.ranges[b];
    std::vector<index_t> kept_local, dropped_local;
    for (index_t f = lo; f < hi; ++f)
      (bc.full_to_kept[f] >= 0 ? kept_local : dropped_local).push_back(f - lo);
    for (std::size_t r = 0; r < kept_local.size(); ++r) {
      index_t row = bc.full_to_kept[lo + kept_local.front()] + static_cast<index_t>(r);
      index_t pos = out.coupling.row_ptr[row];
      for (index_t c : dropped_local) {
        double v = mass.blocks[b](kept_local[r], c);
        if (v != 0.0) {
          out.coupling.col_idx[pos] = static_cast<std::int32_t>(lo + c);
          out.coupling.values[pos] = v;
          ++pos;
        }
      }
    }
  }
  return out;
}

}  // namespace dcm
