#include "dcm/dualgrid.hpp"

#include <algorithm>
#include <cmath>

#include "dcm/polybasis.hpp"

namespace dcm {

namespace {

inline double corner_sign(int corner, int axis) { return (corner >> axis) & 1 ? 1.0 : -1.0; }

}  // namespace

Vec3 subcell_point(const Subcell& sc, const Vec3& xhat) {
  Vec3 p = Vec3::Zero();
  for (int c = 0; c < 8; ++c) {
    double w = 1.0;
    for (int d = 0; d < 3; ++d) w *= 0.5 * (1.0 + corner_sign(c, d) * xhat[d]);
    p += w * sc.corners[c];
  }
  return p;
}

Mat3 subcell_jacobian(const Subcell& sc, const Vec3& xhat) {
  Mat3 jac = Mat3::Zero();
  for (int c = 0; c < 8; ++c) {
    for (int d = 0; d < 3; ++d) {
      double w = 0.5 * corner_sign(c, d);
      for (int d2 = 0; d2 < 3; ++d2)
        if (d2 != d) w *= 0.5 * (1.0 + corner_sign(c, d2) * xhat[d2]);
      jac.col(d) += w * sc.corners[c];
    }
  }
  return jac;
}

Vec3 piola_covariant(const Mat3& jacobian, const Vec3& vhat) {
  return jacobian.transpose().inverse() * vhat;
}

double subcell_volume(const Subcell& sc, int order) {
  QuadratureRule1D gl = gauss_legendre(order);
  double vol = 0.0;
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      for (int c = 0; c < order; ++c) {
        Vec3 x{gl.nodes[a], gl.nodes[b], gl.nodes[c]};
        vol += gl.weights[a] * gl.weights[b] * gl.weights[c] *
               subcell_jacobian(sc, x).determinant();
      }
  return vol;
}

DualComplex build_dual(const PrimalMesh& mesh, const TopologyTables& topo) {
  DualComplex dual;
  const index_t nt = mesh.tet_count();
  dual.tet_barycentres.resize(nt);
  for (index_t t = 0; t < nt; ++t) {
    const auto& tet = mesh.tets[t];
    dual.tet_barycentres[t] = (mesh.vertices[tet[0]] + mesh.vertices[tet[1]] +
                               mesh.vertices[tet[2]] + mesh.vertices[tet[3]]) /
                              4.0;
  }
  dual.face_barycentres.resize(topo.face_count());
  for (index_t f = 0; f < topo.face_count(); ++f) {
    const auto& fv = topo.faces[f];
    dual.face_barycentres[f] =
        (mesh.vertices[fv[0]] + mesh.vertices[fv[1]] + mesh.vertices[fv[2]]) / 3.0;
  }
  dual.edge_midpoints.resize(topo.edge_count());
  for (index_t e = 0; e < topo.edge_count(); ++e)
    dual.edge_midpoints[e] =
        0.5 * (mesh.vertices[topo.edges[e][0]] + mesh.vertices[topo.edges[e][1]]);

  auto edge_id = [&](index_t t, index_t a, index_t b) -> index_t {
    const auto& tet = mesh.tets[t];
    for (int e = 0; e < 6; ++e) {
      constexpr std::array<std::array<int, 2>, 6> loc = {
          {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
      index_t u = tet[loc[e][0]], v = tet[loc[e][1]];
      if ((u == a && v == b) || (u == b && v == a)) return topo.tet_edges[t][e];
    }
    throw Error("dualgrid: edge lookup failed");
  };
  auto face_opposite = [&](index_t t, index_t vtx) -> index_t {
    const auto& tet = mesh.tets[t];
    for (int v = 0; v < 4; ++v)
      if (tet[v] == vtx) return topo.tet_faces[t][v];
    throw Error("dualgrid: face lookup failed");
  };

  dual.subcells.resize(4 * nt);
  for (index_t t = 0; t < nt; ++t) {
    const auto& tet = mesh.tets[t];
    for (int lv = 0; lv < 4; ++lv) {
      Subcell& sc = dual.subcells[4 * t + lv];
      sc.tet = t;
      sc.local_vertex = lv;
      sc.node = tet[lv];
      std::array<index_t, 3> others;
      int w = 0;
      for (int u = 0; u < 4; ++u)
        if (u != lv) others[w++] = tet[u];
      std::sort(others.begin(), others.end());
      const Vec3 n = mesh.vertices[sc.node];
      Mat3 frame;
      for (int d = 0; d < 3; ++d) frame.col(d) = mesh.vertices[others[d]] - n;
      if (frame.determinant() < 0.0) std::swap(others[1], others[2]);

      for (int d = 0; d < 3; ++d) {
        sc.axis_vertex[d] = others[d];
        sc.axis_edge[d] = edge_id(t, sc.node, others[d]);
        sc.minus_face[d] = face_opposite(t, others[d]);
      }
      const Vec3 m0 = mesh.vertices[others[0]], m1 = mesh.vertices[others[1]],
                 m2 = mesh.vertices[others[2]];
      sc.corners[0] = n;
      sc.corners[1] = 0.5 * (n + m0);
      sc.corners[2] = 0.5 * (n + m1);
      sc.corners[4] = 0.5 * (n + m2);
      sc.corners[3] = (n + m0 + m1) / 3.0;
      sc.corners[5] = (n + m0 + m2) / 3.0;
      sc.corners[6] = (n + m1 + m2) / 3.0;
      sc.corners[7] = dual.tet_barycentres[t];

      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
          for (int c = -1; c <= 1; ++c) {
            double det = subcell_jacobian(sc, Vec3(a, b, c)).determinant();
            require(det > 0.0, "dualgrid: inverted subcell (det J <= 0) in tet " +
                                   std::to_string(t));
          }
    }
  }
  return dual;
}

}  // namespace dcm
