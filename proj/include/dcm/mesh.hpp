#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcm/core.hpp"

namespace dcm {

/// Conforming tetrahedral mesh. Tets are stored in canonical orientation: vertex ids
/// ascending except possibly the last pair, swapped so the signed volume is positive.
struct PrimalMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<index_t, 4>> tets;
  std::vector<int> regions;  // one id per tet

  index_t vertex_count() const { return static_cast<index_t>(vertices.size()); }
  index_t tet_count() const { return static_cast<index_t>(tets.size()); }
};

/// Derived incidence tables. Edges/faces are identified by their sorted vertex
/// tuples and numbered in lexicographic order of those tuples, so the tables depend
/// only on the vertex numbering, not on tet input order.
struct TopologyTables {
  std::vector<std::array<index_t, 2>> edges;
  std::vector<std::array<index_t, 3>> faces;
  std::vector<std::array<index_t, 6>> tet_edges;  // local pairs (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)
  std::vector<std::array<index_t, 4>> tet_faces;  // entry v = face opposite local vertex v
  std::vector<std::array<index_t, 2>> face_tets;  // second = -1 on boundary faces
  std::vector<char> face_boundary;
  std::vector<char> edge_boundary;
  std::vector<char> vertex_boundary;
  std::vector<std::vector<index_t>> vertex_tets;
  std::vector<std::vector<index_t>> edge_tets;

  index_t edge_count() const { return static_cast<index_t>(edges.size()); }
  index_t face_count() const { return static_cast<index_t>(faces.size()); }
};

enum class MeshFormat { Auto, Gmsh, Simple };

/// Reads a mesh from disk. Gmsh MSH 2.2 ASCII (tet elements only, physical tag =
/// region) or the plain "vertices/tets" listing; Auto sniffs the first line.
/// Canonicalizes orientation and validates.
PrimalMesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::Auto);

PrimalMesh parse_mesh_text(const std::string& text, MeshFormat format);

/// Reorders tet vertices into canonical positive orientation and validates:
/// at least one tet, no degenerate tets, no dangling vertices, indices in range.
void canonicalize(PrimalMesh& mesh);

/// Builds incidence tables; rejects non-manifold configurations (face in >2 tets).
TopologyTables build_topology(const PrimalMesh& mesh);

/// Structured box mesh: nx*ny*nz cells, six tets per cell (Kuhn subdivision, shared
/// main diagonal direction, conforming across cells). Optional region callback
/// receives the tet centroid; default region 0.
PrimalMesh box_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz,
                    const std::function<int(const Vec3&)>& region = {});

/// Uniform red refinement: each tet splits into 8 (4 corner tets + octahedron split
/// along its shortest diagonal). Conforming; regions inherited.
PrimalMesh refine_uniform(const PrimalMesh& mesh);

/// Random vertex jitter with the connectivity untouched. Each vertex moves by a
/// uniform offset of up to `amplitude` times its shortest incident edge; vertex
/// coordinates lying on the bounding-box planes are pinned so the domain is
/// preserved exactly. Throws if any tet would invert or degenerate.
PrimalMesh perturb_vertices(const PrimalMesh& mesh, double amplitude, std::uint64_t seed);

double tet_volume(const PrimalMesh& mesh, index_t t);

/// FNV-1a over vertex coordinates, connectivity and regions; used in run manifests.
std::uint64_t mesh_hash(const PrimalMesh& mesh);

}  // namespace dcm
