#pragma once

#include <array>
#include <vector>

#include "dcm/mesh.hpp"

namespace dcm {

/// Hexahedral intersection of a tet with the barycentric dual cell of one of its
/// vertices. Mapped from [-1,1]^3 by the trilinear interpolant of its 8 corners;
/// corner c sits at reference position (+-1,...) with sign of axis d = bit d of c.
/// Corner 0 is the primal node, corner 7 the tet barycentre. Reference axis d runs
/// along the tet edge (node, axis_vertex[d]); the three axes are ordered by
/// ascending opposite-vertex id, with the last two swapped when needed to keep the
/// frame positively oriented.
struct Subcell {
  index_t tet = -1;
  int local_vertex = -1;
  index_t node = -1;                      // primal vertex owning the dual cell
  std::array<index_t, 3> axis_vertex{};   // far endpoint of the edge along axis d
  std::array<index_t, 3> axis_edge{};     // primal edge id along axis d
  std::array<index_t, 3> minus_face{};    // primal face on reference face xhat_d = -1
  std::array<Vec3, 8> corners{};
};

struct DualComplex {
  std::vector<Subcell> subcells;  // 4 per tet, index 4*tet + local_vertex
  std::vector<Vec3> tet_barycentres;
  std::vector<Vec3> face_barycentres;
  std::vector<Vec3> edge_midpoints;

  index_t subcell_count() const { return static_cast<index_t>(subcells.size()); }
};

/// Builds all subcells and validates det J > 0 on a 3x3x3 reference sample grid.
DualComplex build_dual(const PrimalMesh& mesh, const TopologyTables& topo);

Vec3 subcell_point(const Subcell& sc, const Vec3& xhat);
Mat3 subcell_jacobian(const Subcell& sc, const Vec3& xhat);

/// Covariant (curl-conforming) transform: physical field J^{-T} vhat.
Vec3 piola_covariant(const Mat3& jacobian, const Vec3& vhat);

/// Volume by tensor Gauss quadrature of |det J| (order points per axis).
double subcell_volume(const Subcell& sc, int order = 3);

}  // namespace dcm
