#include <algorithm>
#include <cmath>
#include <set>

#include "dcm/assembly.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dcm;
using namespace testsupport;

namespace {

struct Spaces {
  PrimalMesh mesh;
  TopologyTables topo;
  DualComplex dual;
  DofSpace electric;
  DofSpace magnetic;
};

Spaces build(PrimalMesh mesh, int order) {
  Spaces s;
  s.mesh = std::move(mesh);
  s.topo = build_topology(s.mesh);
  s.dual = build_dual(s.mesh, s.topo);
  s.electric = build_electric_space(s.mesh, s.topo, s.dual, order);
  s.magnetic = build_magnetic_space(s.mesh, s.topo, s.dual, order);
  return s;
}

bool same_structure(const CsrMatrix& a, const CsrMatrix& b) {
  return a.rows == b.rows && a.cols == b.cols && a.row_ptr == b.row_ptr &&
         a.col_idx == b.col_idx;
}

// Independent dense-quadrature route for the consistent mass: integrate the
// pushed-forward global basis functions with a tensor Gauss-Legendre rule.
MatrixX brute_force_block(const Spaces& s, const DofSpace& sp, std::size_t owner_block,
                          int npts) {
  const auto range = sp.owner_ranges[owner_block];
  const index_t lo = range[0], n = range[1] - range[0];
  std::set<index_t> cells;
  for (index_t d = lo; d < lo + n; ++d)
    for (const auto& slot : sp.dofs[d].slots) cells.insert(slot.subcell);
  QuadratureRule1D gl = gauss_legendre(npts);
  MatrixX block = MatrixX::Zero(n, n);
  for (index_t sc : cells) {
    for (int a = 0; a < npts; ++a)
      for (int b = 0; b < npts; ++b)
        for (int c = 0; c < npts; ++c) {
          Vec3 xhat(gl.nodes[a], gl.nodes[b], gl.nodes[c]);
          double w = gl.weights[a] * gl.weights[b] * gl.weights[c] *
                     std::abs(subcell_jacobian(s.dual.subcells[sc], xhat).determinant());
          std::vector<Vec3> vals(n);
          for (index_t i = 0; i < n; ++i)
            vals[i] = evaluate_global(sp, s.dual, lo + i, sc, xhat);
          for (index_t i = 0; i < n; ++i)
            for (index_t j = i; j < n; ++j) block(i, j) += w * vals[i].dot(vals[j]);
        }
  }
  return block.selfadjointView<Eigen::Upper>();
}

}  // namespace

TEST_SUITE("assembly") {

TEST_CASE("curl tables satisfy the integration-by-parts identity") {
  for (int p : {1, 2, 4}) {
    CAPTURE(p);
    LagrangeBasis1D basis(gauss_radau(p).nodes);
    CurlTables t = build_curl_tables(basis);
    const int n = basis.size();
    REQUIRE(t.a.rows() == n);
    for (int a = 0; a < n; ++a) {
      CHECK(t.e1[a] == doctest::Approx(basis.evaluate(a, 1.0)).epsilon(1e-14));
      for (int b = 0; b < n; ++b) {
        // a is symmetric by the substitution x -> -x.
        CHECK(t.a(b, a) == doctest::Approx(t.a(a, b)).epsilon(1e-13));
        // bplus folds the x=+1 boundary term into b.
        CHECK(t.bplus(b, a) == t.b(b, a) + (a == 0 ? t.e1[b] : 0.0));
        // Independent-quadrature d must close the 1D integration by parts:
        // d(a,b) = e1(a)[b==0] - bplus(b,a).
        double expect = (b == 0 ? t.e1[a] : 0.0) - t.bplus(b, a);
        CHECK(std::abs(t.d(a, b) - expect) <= 5e-15);
      }
    }
  }
}

TEST_CASE("independently assembled reverse curl is the exact transpose") {
  for (int p : {1, 2, 3}) {
    CAPTURE(p);
    Spaces s = build(two_tets(), p);
    CsrMatrix c = assemble_curl(s.magnetic, s.electric);
    CsrMatrix ct = assemble_curl_transpose(s.electric, s.magnetic);
    CsrMatrix ctt = c.transposed();
    REQUIRE(same_structure(ct, ctt));
    CHECK(bitwise_equal(ct.values, ctt.values));
  }
}

TEST_CASE("curl entries never see vertex coordinates") {
  PrimalMesh base = box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 1, 1, 1);
  Spaces s0 = build(base, 2);
  CsrMatrix c0 = assemble_curl(s0.magnetic, s0.electric);

  Spaces s1 = build(perturb_vertices(base, 0.3, 77), 2);
  CsrMatrix c1 = assemble_curl(s1.magnetic, s1.electric);
  REQUIRE(same_structure(c0, c1));
  CHECK(bitwise_equal(c0.values, c1.values));

  Spaces s2 = build(scaled(base, 3.7), 2);
  CsrMatrix c2 = assemble_curl(s2.magnetic, s2.electric);
  REQUIRE(same_structure(c0, c2));
  CHECK(bitwise_equal(c0.values, c2.values));
}

TEST_CASE("curl nnz follows the closed count") {
  for (int p : {1, 2}) {
    for (auto mesh : {single_tet(), two_tets()}) {
      Spaces s = build(mesh, p);
      CsrMatrix c = assemble_curl(s.magnetic, s.electric);
      index_t pred = 24 * s.mesh.tet_count();
      for (int k = 0; k < 6; ++k) pred *= (p + 1);
      CHECK(c.nnz() == pred);
    }
  }
}

TEST_CASE("csr apply and transpose apply match the dense forms") {
  Spaces s = build(two_tets(), 1);
  CsrMatrix c = assemble_curl(s.magnetic, s.electric);
  MatrixX d = dense(c);
  VectorX x = random_vector(c.cols, 1);
  VectorX y = random_vector(c.rows, 2);
  CHECK((c.apply(x) - d * x).norm() <= 1e-12 * (d * x).norm());
  CHECK((c.apply_transpose(y) - d.transpose() * y).norm() <=
        1e-12 * (d.transpose() * y).norm());
  CHECK((dense(c.transposed()) - d.transpose()).norm() == 0.0);
}

TEST_CASE("mass scales linearly with the geometry, curl not at all") {
  PrimalMesh base = perturb_vertices(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 1, 1, 1), 0.2, 3);
  const double scale = 2.5;
  Spaces s0 = build(base, 2);
  Spaces s1 = build(scaled(base, scale), 2);
  MaterialFn one = constant_material(1.0);
  for (auto pick : {&Spaces::electric, &Spaces::magnetic}) {
    BlockDiagMatrix m0 = assemble_lumped_mass(s0.*pick, s0.dual, one);
    BlockDiagMatrix m1 = assemble_lumped_mass(s1.*pick, s1.dual, one);
    REQUIRE(m0.blocks.size() == m1.blocks.size());
    for (std::size_t b = 0; b < m0.blocks.size(); ++b)
      CHECK((m1.blocks[b] - scale * m0.blocks[b]).norm() <=
            1e-12 * scale * m0.blocks[b].norm());

    BlockDiagMatrix c0 = assemble_consistent_mass(s0.*pick, s0.dual, one);
    BlockDiagMatrix c1 = assemble_consistent_mass(s1.*pick, s1.dual, one);
    for (std::size_t b = 0; b < c0.blocks.size(); ++b)
      CHECK((c1.blocks[b] - scale * c0.blocks[b]).norm() <=
            1e-12 * scale * c0.blocks[b].norm());
  }
}

TEST_CASE("lumped mass blocks are the class blocks, consistent the owner blocks") {
  Spaces s = build(two_tets(), 2);
  MaterialFn one = constant_material(1.0);
  for (auto pick : {&Spaces::electric, &Spaces::magnetic}) {
    const DofSpace& sp = s.*pick;
    BlockDiagMatrix lumped = assemble_lumped_mass(sp, s.dual, one);
    CHECK(lumped.ranges == sp.class_ranges);
    CHECK(lumped.factorized());
    BlockDiagMatrix cons = assemble_consistent_mass(sp, s.dual, one);
    CHECK(cons.ranges == sp.owner_ranges);
    CHECK_FALSE(cons.factorized());

    VectorX x = random_vector(sp.size(), 5);
    CHECK(lumped.quadratic(x) > 0.0);
    CHECK((lumped.solve(lumped.apply(x)) - x).norm() <= 1e-12 * x.norm());
    // x' M x computed two ways.
    CHECK(lumped.quadratic(x) == doctest::Approx(x.dot(lumped.apply(x))).epsilon(1e-13));
  }
}

TEST_CASE("consistent mass at the collocation rule collapses to the lumped mass") {
  // With the (P+1)-point Radau rule the quadrature nodes are the collocation
  // nodes, so cross terms vanish and both assemblies must produce the same
  // matrix. This checks the two quadrature paths against each other.
  PrimalMesh mesh = perturb_vertices(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 1, 1, 1), 0.2, 8);
  for (int p : {1, 2}) {
    CAPTURE(p);
    Spaces s = build(mesh, p);
    for (auto pick : {&Spaces::electric, &Spaces::magnetic}) {
      const DofSpace& sp = s.*pick;
      BlockDiagMatrix lumped = assemble_lumped_mass(sp, s.dual, constant_material(1.0));
      BlockDiagMatrix collapsed =
          assemble_consistent_mass(sp, s.dual, constant_material(1.0), p + 1);
      MatrixX dl = dense(lumped), dc = dense(collapsed);
      CHECK((dl - dc).cwiseAbs().maxCoeff() <= 1e-13 * dl.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("consistent mass matches an independent dense quadrature") {
  Spaces s = build(single_tet(), 1);
  for (auto pick : {&Spaces::electric, &Spaces::magnetic}) {
    const DofSpace& sp = s.*pick;
    BlockDiagMatrix cons = assemble_consistent_mass(sp, s.dual, constant_material(1.0), 12);
    double worst8 = 0.0, worst12 = 0.0;
    for (std::size_t b = 0; b < cons.blocks.size(); ++b) {
      double scale = cons.blocks[b].cwiseAbs().maxCoeff();
      worst8 = std::max(worst8,
                        (cons.blocks[b] - brute_force_block(s, sp, b, 8)).cwiseAbs().maxCoeff() /
                            scale);
      worst12 = std::max(
          worst12,
          (cons.blocks[b] - brute_force_block(s, sp, b, 12)).cwiseAbs().maxCoeff() / scale);
    }
    // The integrand has rational metric factors; agreement must tighten as the
    // oracle rule is refined and be far below any discretization scale.
    CHECK(worst8 <= 1e-6);
    CHECK(worst12 <= 1e-9);
    CHECK(worst12 < worst8);
  }
}

TEST_CASE("lumped nnz per row is non-increasing in the order") {
  Spaces ref = build(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 2, 2, 2), 1);
  for (auto pick : {&Spaces::electric, &Spaces::magnetic}) {
    double prev = 1e300;
    for (int p = 1; p <= 3; ++p) {
      Spaces s = build(ref.mesh, p);
      const DofSpace& sp = s.*pick;
      BlockDiagMatrix lumped = assemble_lumped_mass(sp, s.dual, constant_material(1.0));
      double per_row = static_cast<double>(lumped.nonzero_count()) / lumped.dim;
      CHECK(per_row <= prev + 1e-12);
      prev = per_row;
    }
  }
}

TEST_CASE("region material equals the equivalent callback") {
  PrimalMesh mesh = two_tets();
  mesh.regions = {0, 1};
  Spaces s = build(mesh, 1);
  MaterialFn by_region = region_material(s.mesh, {2.0, 3.0});
  MaterialFn by_hand = [&](index_t tet, const Vec3&) {
    return Mat3(Mat3::Identity() * (s.mesh.regions[tet] == 0 ? 2.0 : 3.0));
  };
  for (auto pick : {&Spaces::electric, &Spaces::magnetic}) {
    const DofSpace& sp = s.*pick;
    MatrixX a = dense(assemble_lumped_mass(sp, s.dual, by_region));
    MatrixX b = dense(assemble_lumped_mass(sp, s.dual, by_hand));
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-15 * a.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("anisotropic materials assemble, indefinite ones are rejected") {
  Spaces s = build(single_tet(), 1);
  Mat3 spd;
  spd << 2.0, 0.3, 0.0, 0.3, 1.5, -0.2, 0.0, -0.2, 1.0;
  BlockDiagMatrix m = assemble_lumped_mass(s.electric, s.dual, constant_material(spd));
  CHECK(m.quadratic(random_vector(s.electric.size(), 4)) > 0.0);

  CHECK_THROWS_AS(assemble_lumped_mass(s.electric, s.dual, constant_material(-1.0)), Error);
  Mat3 indefinite = Mat3::Identity();
  indefinite(2, 2) = -0.5;
  CHECK_THROWS_AS(assemble_lumped_mass(s.electric, s.dual, constant_material(indefinite)),
                  Error);
}

TEST_CASE("column restriction drops exactly the constrained columns") {
  Spaces s = build(single_tet(), 1);
  CsrMatrix c = assemble_curl(s.magnetic, s.electric);
  BoundaryConstraint bc = electric_wall_constraint(s.electric, s.topo);
  CsrMatrix r = restrict_columns(c, bc.full_to_kept, bc.kept_count());
  CHECK(r.rows == c.rows);
  CHECK(r.cols == bc.kept_count());
  MatrixX dc = dense(c), dr = dense(r);
  for (index_t k = 0; k < bc.kept_count(); ++k)
    CHECK((dr.col(k) - dc.col(bc.kept[k])).norm() == 0.0);
}

TEST_CASE("constrained mass keeps the reduced block and the coupling") {
  Spaces s = build(two_tets(), 1);
  BoundaryConstraint bc = electric_wall_constraint(s.electric, s.topo);
  BlockDiagMatrix full = assemble_lumped_mass(s.electric, s.dual, constant_material(1.0));
  ConstrainedMass cm = constrain_mass(full, bc);
  CHECK(cm.reduced.dim == bc.kept_count());
  CHECK(cm.coupling.rows == bc.kept_count());
  CHECK(cm.coupling.cols == s.electric.size());

  MatrixX df = dense(full);
  MatrixX dr = dense(cm.reduced);
  MatrixX dcpl = dense(cm.coupling);
  for (index_t i = 0; i < bc.kept_count(); ++i) {
    for (index_t j = 0; j < bc.kept_count(); ++j)
      CHECK(dr(i, j) == df(bc.kept[i], bc.kept[j]));
    for (index_t j = 0; j < s.electric.size(); ++j) {
      double expect = (bc.full_to_kept[j] == -1) ? df(bc.kept[i], j) : 0.0;
      CHECK(dcpl(i, j) == expect);
    }
  }
}

TEST_CASE("pml restriction marks exactly the dofs with support in the layer") {
  PrimalMesh mesh = box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 2, 1, 1);
  Spaces s = build(mesh, 1);
  PmlSpec spec;
  spec.axis = 0;
  spec.intervals = {{0.0, 0.5}};
  PmlMatrices pml = assemble_pml(s.electric, s.magnetic, s.mesh, s.dual, spec);

  // Independent recomputation of the support test.
  std::vector<char> tet_in(s.mesh.tet_count(), 0);
  for (index_t t = 0; t < s.mesh.tet_count(); ++t) {
    Vec3 c = (s.mesh.vertices[s.mesh.tets[t][0]] + s.mesh.vertices[s.mesh.tets[t][1]] +
              s.mesh.vertices[s.mesh.tets[t][2]] + s.mesh.vertices[s.mesh.tets[t][3]]) /
             4.0;
    tet_in[t] = spec.contains(c[0]);
  }
  auto expect_list = [&](const DofSpace& sp) {
    std::vector<index_t> out;
    for (index_t d = 0; d < sp.size(); ++d)
      for (const auto& slot : sp.dofs[d].slots)
        if (tet_in[s.dual.subcells[slot.subcell].tet]) {
          out.push_back(d);
          break;
        }
    return out;
  };
  CHECK(pml.restrict_e == expect_list(s.electric));
  CHECK(pml.restrict_h == expect_list(s.magnetic));
  for (index_t d = 0; d < s.electric.size(); ++d) {
    bool in = std::binary_search(pml.restrict_e.begin(), pml.restrict_e.end(), d);
    CHECK(pml.mask_e[d] == (in ? 1.0 : 0.0));
  }
  CHECK(pml.damp_tilde_e.ranges == s.electric.class_ranges);
  CHECK(pml.damp_hat_h.ranges == s.magnetic.class_ranges);

  PmlSpec straddling;
  straddling.axis = 0;
  straddling.intervals = {{0.0, 0.25}};
  CHECK_THROWS_AS(assemble_pml(s.electric, s.magnetic, s.mesh, s.dual, straddling), Error);
}

}  // TEST_SUITE
