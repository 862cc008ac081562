#include <algorithm>
#include <random>

#include "dcm/dualgrid.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dcm;
using namespace testsupport;

namespace {

double total_volume(const PrimalMesh& m) {
  double v = 0.0;
  for (index_t t = 0; t < m.tet_count(); ++t) v += tet_volume(m, t);
  return v;
}

// Sorted corner points of the subcell's reference face xhat_d = -1.
std::vector<Vec3> minus_face_corners(const Subcell& sc, int d) {
  std::vector<Vec3> pts;
  for (int c = 0; c < 8; ++c)
    if (((c >> d) & 1) == 0) pts.push_back(sc.corners[c]);
  std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[2] < b[2];
  });
  return pts;
}

}  // namespace

TEST_SUITE("dualgrid") {

TEST_CASE("subcell corners follow the barycentric convention") {
  PrimalMesh m = two_tets();
  TopologyTables topo = build_topology(m);
  DualComplex dual = build_dual(m, topo);
  REQUIRE(dual.subcell_count() == 8);

  for (const Subcell& sc : dual.subcells) {
    const Vec3 n = m.vertices[sc.node];
    const Vec3 bary = dual.tet_barycentres[sc.tet];
    CHECK((sc.corners[0] - n).norm() == 0.0);
    CHECK((sc.corners[7] - bary).norm() <= 1e-15);
    CHECK(m.tets[sc.tet][sc.local_vertex] == sc.node);

    Vec3 mv[3];
    for (int d = 0; d < 3; ++d) {
      mv[d] = m.vertices[sc.axis_vertex[d]];
      // Corner 2^d is the midpoint of the primal edge along axis d.
      CHECK((sc.corners[1 << d] - 0.5 * (n + mv[d])).norm() <= 1e-15);
      // axis_edge really is that primal edge.
      std::array<index_t, 2> ev = topo.edges[sc.axis_edge[d]];
      std::sort(ev.begin(), ev.end());
      std::array<index_t, 2> expect{std::min(sc.node, sc.axis_vertex[d]),
                                    std::max(sc.node, sc.axis_vertex[d])};
      CHECK(ev == expect);
      // minus_face[d] spans the node and the two other axis vertices.
      std::array<index_t, 3> fv{sc.node, sc.axis_vertex[(d + 1) % 3],
                                sc.axis_vertex[(d + 2) % 3]};
      std::sort(fv.begin(), fv.end());
      CHECK(topo.faces[sc.minus_face[d]] == fv);
    }
    // Mixed corners are face barycentres.
    CHECK((sc.corners[3] - (n + mv[0] + mv[1]) / 3.0).norm() <= 1e-15);
    CHECK((sc.corners[5] - (n + mv[0] + mv[2]) / 3.0).norm() <= 1e-15);
    CHECK((sc.corners[6] - (n + mv[1] + mv[2]) / 3.0).norm() <= 1e-15);

    // The reference frame is right-handed.
    Mat3 frame;
    for (int d = 0; d < 3; ++d) frame.col(d) = mv[d] - n;
    CHECK(frame.determinant() > 0.0);
  }
}

TEST_CASE("trilinear map reproduces corners and matches its jacobian") {
  PrimalMesh m = perturb_vertices(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 1, 1, 1), 0.2, 7);
  TopologyTables topo = build_topology(m);
  DualComplex dual = build_dual(m, topo);

  const Subcell& sc = dual.subcells[5];
  for (int c = 0; c < 8; ++c) {
    Vec3 ref(((c >> 0) & 1) ? 1 : -1, ((c >> 1) & 1) ? 1 : -1, ((c >> 2) & 1) ? 1 : -1);
    CHECK((subcell_point(sc, ref) - sc.corners[c]).norm() <= 1e-14);
  }

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-0.9, 0.9);
  const double h = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    Vec3 x(dist(rng), dist(rng), dist(rng));
    Mat3 jac = subcell_jacobian(sc, x);
    for (int d = 0; d < 3; ++d) {
      Vec3 xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      Vec3 fd = (subcell_point(sc, xp) - subcell_point(sc, xm)) / (2 * h);
      CHECK((jac.col(d) - fd).norm() <= 1e-8);
    }
  }
}

TEST_CASE("piola transform is the inverse transpose") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Mat3 j;
    do {
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) j(r, c) = dist(rng);
    } while (std::abs(j.determinant()) < 0.1);
    Vec3 vhat(dist(rng), dist(rng), dist(rng));
    Vec3 v = piola_covariant(j, vhat);
    CHECK((j.transpose() * v - vhat).norm() <= 1e-12);
  }
}

TEST_CASE("subcells partition the mesh volume") {
  PrimalMesh m = perturb_vertices(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 2, 2, 2), 0.25, 21);
  TopologyTables topo = build_topology(m);
  DualComplex dual = build_dual(m, topo);
  double sum = 0.0;
  for (const Subcell& sc : dual.subcells) sum += subcell_volume(sc);
  CHECK(sum == doctest::Approx(total_volume(m)).epsilon(1e-10));

  // Within one tet the four subcells split the volume equally (barycentric cut).
  double v0 = tet_volume(m, 0);
  for (int lv = 0; lv < 4; ++lv)
    CHECK(subcell_volume(dual.subcells[lv]) == doctest::Approx(0.25 * v0).epsilon(1e-10));
}

TEST_CASE("determinant positive on sample grid everywhere") {
  for (std::uint64_t seed : {1ull, 2ull}) {
    PrimalMesh m =
        perturb_vertices(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 2, 2, 2), 0.3, seed);
    TopologyTables topo = build_topology(m);
    DualComplex dual = build_dual(m, topo);  // build_dual itself validates
    for (const Subcell& sc : dual.subcells)
      for (double a : {-1.0, 0.0, 1.0})
        for (double b : {-1.0, 0.0, 1.0})
          for (double c : {-1.0, 0.0, 1.0})
            CHECK(subcell_jacobian(sc, Vec3(a, b, c)).determinant() > 0.0);
  }
}

TEST_CASE("interior faces carry matching subcell faces from both sides") {
  PrimalMesh m = perturb_vertices(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 2, 2, 2), 0.2, 33);
  TopologyTables topo = build_topology(m);
  DualComplex dual = build_dual(m, topo);

  index_t checked = 0;
  for (index_t f = 0; f < topo.face_count(); ++f) {
    if (topo.face_boundary[f]) continue;
    for (index_t v : topo.faces[f]) {
      // One subcell per adjacent tet has this face as one of its minus-faces.
      std::vector<std::vector<Vec3>> sides;
      for (index_t t : topo.face_tets[f]) {
        const auto& tet = m.tets[t];
        int lv = static_cast<int>(std::find(tet.begin(), tet.end(), v) - tet.begin());
        const Subcell& sc = dual.subcells[4 * t + lv];
        for (int d = 0; d < 3; ++d)
          if (sc.minus_face[d] == f) sides.push_back(minus_face_corners(sc, d));
      }
      REQUIRE(sides.size() == 2);
      REQUIRE(sides[0].size() == 4);
      for (int k = 0; k < 4; ++k) CHECK((sides[0][k] - sides[1][k]).norm() <= 1e-14);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("dual point tables hold barycentres and midpoints") {
  PrimalMesh m = two_tets();
  TopologyTables topo = build_topology(m);
  DualComplex dual = build_dual(m, topo);
  REQUIRE(dual.tet_barycentres.size() == 2);
  REQUIRE(dual.face_barycentres.size() == 7);
  REQUIRE(dual.edge_midpoints.size() == 9);
  for (index_t e = 0; e < topo.edge_count(); ++e) {
    Vec3 mid = 0.5 * (m.vertices[topo.edges[e][0]] + m.vertices[topo.edges[e][1]]);
    CHECK((dual.edge_midpoints[e] - mid).norm() == 0.0);
  }
}

}  // TEST_SUITE
