#include "dcm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

namespace dcm {

namespace {

double signed_volume6(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a);
}

constexpr std::array<std::array<int, 2>, 6> kLocalEdges = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

}  // namespace

double tet_volume(const PrimalMesh& mesh, index_t t) {
  const auto& tet = mesh.tets[t];
  return signed_volume6(mesh.vertices[tet[0]], mesh.vertices[tet[1]], mesh.vertices[tet[2]],
                        mesh.vertices[tet[3]]) /
         6.0;
}

void canonicalize(PrimalMesh& mesh) {
  require(!mesh.tets.empty(), "mesh: no tetrahedra");
  require(!mesh.vertices.empty(), "mesh: no vertices");
  if (mesh.regions.empty()) mesh.regions.assign(mesh.tets.size(), 0);
  require(mesh.regions.size() == mesh.tets.size(), "mesh: region list size mismatch");

  const index_t nv = mesh.vertex_count();
  double hmax = 0.0;
  for (auto& tet : mesh.tets) {
    std::sort(tet.begin(), tet.end());
    for (int i = 0; i < 4; ++i) {
      require(tet[i] >= 0 && tet[i] < nv, "mesh: vertex index out of range");
      require(i == 0 || tet[i] != tet[i - 1], "mesh: tet with repeated vertex");
    }
    for (auto [la, lb] : kLocalEdges)
      hmax = std::max(hmax, (mesh.vertices[tet[la]] - mesh.vertices[tet[lb]]).norm());
  }
  for (auto& tet : mesh.tets) {
    double v6 = signed_volume6(mesh.vertices[tet[0]], mesh.vertices[tet[1]],
                               mesh.vertices[tet[2]], mesh.vertices[tet[3]]);
    require(std::abs(v6) > 1e-12 * hmax * hmax * hmax, "mesh: degenerate tetrahedron");
    if (v6 < 0.0) std::swap(tet[2], tet[3]);
  }

  std::vector<char> used(nv, 0);
  for (const auto& tet : mesh.tets)
    for (index_t v : tet) used[v] = 1;
  for (index_t v = 0; v < nv; ++v)
    require(used[v], "mesh: dangling vertex " + std::to_string(v));
}

TopologyTables build_topology(const PrimalMesh& mesh) {
  TopologyTables topo;
  const index_t nt = mesh.tet_count();
  const index_t nv = mesh.vertex_count();

  std::map<std::array<index_t, 2>, index_t> edge_ids;
  std::map<std::array<index_t, 3>, index_t> face_ids;
  for (const auto& tet : mesh.tets) {
    for (auto [la, lb] : kLocalEdges) {
      std::array<index_t, 2> key{std::min(tet[la], tet[lb]), std::max(tet[la], tet[lb])};
      edge_ids.emplace(key, 0);
    }
    for (int v = 0; v < 4; ++v) {
      std::array<index_t, 3> key;
      int w = 0;
      for (int u = 0; u < 4; ++u)
        if (u != v) key[w++] = tet[u];
      std::sort(key.begin(), key.end());
      face_ids.emplace(key, 0);
    }
  }
  index_t eid = 0;
  for (auto& [key, id] : edge_ids) {
    id = eid++;
    topo.edges.push_back(key);
  }
  index_t fid = 0;
  for (auto& [key, id] : face_ids) {
    id = fid++;
    topo.faces.push_back(key);
  }

  topo.tet_edges.resize(nt);
  topo.tet_faces.resize(nt);
  topo.face_tets.assign(topo.faces.size(), {-1, -1});
  topo.vertex_tets.resize(nv);
  topo.edge_tets.resize(topo.edges.size());

  for (index_t t = 0; t < nt; ++t) {
    const auto& tet = mesh.tets[t];
    for (int e = 0; e < 6; ++e) {
      auto [la, lb] = kLocalEdges[e];
      std::array<index_t, 2> key{std::min(tet[la], tet[lb]), std::max(tet[la], tet[lb])};
      index_t id = edge_ids.at(key);
      topo.tet_edges[t][e] = id;
      topo.edge_tets[id].push_back(t);
    }
    for (int v = 0; v < 4; ++v) {
      std::array<index_t, 3> key;
      int w = 0;
      for (int u = 0; u < 4; ++u)
        if (u != v) key[w++] = tet[u];
      std::sort(key.begin(), key.end());
      index_t id = face_ids.at(key);
      topo.tet_faces[t][v] = id;
      auto& adj = topo.face_tets[id];
      if (adj[0] < 0)
        adj[0] = t;
      else if (adj[1] < 0)
        adj[1] = t;
      else
        throw Error("mesh: non-manifold face shared by more than two tets");
    }
    for (index_t v : tet) topo.vertex_tets[v].push_back(t);
  }

  topo.face_boundary.assign(topo.faces.size(), 0);
  topo.edge_boundary.assign(topo.edges.size(), 0);
  topo.vertex_boundary.assign(nv, 0);
  for (index_t f = 0; f < topo.face_count(); ++f) {
    if (topo.face_tets[f][1] < 0) {
      topo.face_boundary[f] = 1;
      for (index_t v : topo.faces[f]) topo.vertex_boundary[v] = 1;
    }
  }
  // Boundary edges are edges of boundary faces.
  std::map<std::array<index_t, 2>, index_t> edge_lookup;
  for (index_t e = 0; e < topo.edge_count(); ++e) edge_lookup[topo.edges[e]] = e;
  for (index_t f = 0; f < topo.face_count(); ++f) {
    if (!topo.face_boundary[f]) continue;
    const auto& fv = topo.faces[f];
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        topo.edge_boundary[edge_lookup.at({fv[i], fv[j]})] = 1;
  }
  return topo;
}

namespace {

PrimalMesh parse_simple(std::istream& in) {
  PrimalMesh mesh;
  std::string tok;
  require(static_cast<bool>(in >> tok) && tok == "vertices", "simple mesh: expected 'vertices'");
  index_t nv = 0;
  require(static_cast<bool>(in >> nv) && nv > 0, "simple mesh: bad vertex count");
  mesh.vertices.resize(nv);
  for (index_t i = 0; i < nv; ++i)
    require(static_cast<bool>(in >> mesh.vertices[i][0] >> mesh.vertices[i][1] >>
                              mesh.vertices[i][2]),
            "simple mesh: truncated vertex list");
  require(static_cast<bool>(in >> tok) && tok == "tets", "simple mesh: expected 'tets'");
  index_t nt = 0;
  require(static_cast<bool>(in >> nt) && nt > 0, "simple mesh: bad tet count");
  mesh.tets.resize(nt);
  mesh.regions.resize(nt);
  for (index_t t = 0; t < nt; ++t) {
    auto& tet = mesh.tets[t];
    require(static_cast<bool>(in >> tet[0] >> tet[1] >> tet[2] >> tet[3] >> mesh.regions[t]),
            "simple mesh: truncated tet list");
  }
  return mesh;
}

PrimalMesh parse_gmsh(std::istream& in) {
  PrimalMesh mesh;
  std::string line;
  std::map<index_t, index_t> node_map;
  bool saw_format = false, saw_nodes = false, saw_elements = false;
  while (std::getline(in, line)) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      std::getline(in, line);
      std::istringstream ls(line);
      double ver = 0;
      ls >> ver;
      require(ver >= 2.0 && ver < 3.0, "gmsh: unsupported format version (need 2.x ASCII)");
      saw_format = true;
    } else if (line.rfind("$Nodes", 0) == 0) {
      std::getline(in, line);
      index_t n = std::stoll(line);
      for (index_t i = 0; i < n; ++i) {
        require(static_cast<bool>(std::getline(in, line)), "gmsh: truncated $Nodes");
        std::istringstream ls(line);
        index_t id;
        Vec3 p;
        require(static_cast<bool>(ls >> id >> p[0] >> p[1] >> p[2]), "gmsh: bad node line");
        node_map[id] = mesh.vertex_count();
        mesh.vertices.push_back(p);
      }
      saw_nodes = true;
    } else if (line.rfind("$Elements", 0) == 0) {
      std::getline(in, line);
      index_t n = std::stoll(line);
      for (index_t i = 0; i < n; ++i) {
        require(static_cast<bool>(std::getline(in, line)), "gmsh: truncated $Elements");
        std::istringstream ls(line);
        index_t id;
        int type, ntags;
        require(static_cast<bool>(ls >> id >> type >> ntags), "gmsh: bad element line");
        std::vector<index_t> tags(ntags);
        for (int k = 0; k < ntags; ++k) require(static_cast<bool>(ls >> tags[k]), "gmsh: bad tag");
        if (type != 4) continue;  // only linear tets carried over
        std::array<index_t, 4> tet;
        for (int k = 0; k < 4; ++k) {
          index_t nid;
          require(static_cast<bool>(ls >> nid), "gmsh: truncated tet connectivity");
          auto it = node_map.find(nid);
          require(it != node_map.end(), "gmsh: tet references unknown node");
          tet[k] = it->second;
        }
        mesh.tets.push_back(tet);
        mesh.regions.push_back(ntags > 0 ? static_cast<int>(tags[0]) : 0);
      }
      saw_elements = true;
    }
  }
  require(saw_format && saw_nodes && saw_elements, "gmsh: missing required section");
  // Drop nodes not referenced by any tet (gmsh files often carry surface-only nodes).
  std::vector<index_t> remap(mesh.vertex_count(), -1);
  PrimalMesh out;
  for (auto& tet : mesh.tets) {
    for (auto& v : tet) {
      if (remap[v] < 0) {
        remap[v] = out.vertex_count();
        out.vertices.push_back(mesh.vertices[v]);
      }
      v = remap[v];
    }
  }
  out.tets = std::move(mesh.tets);
  out.regions = std::move(mesh.regions);
  return out;
}

}  // namespace

PrimalMesh parse_mesh_text(const std::string& text, MeshFormat format) {
  if (format == MeshFormat::Auto) {
    auto first = text.find_first_not_of(" \t\r\n");
    format = (first != std::string::npos && text[first] == '$') ? MeshFormat::Gmsh
                                                                : MeshFormat::Simple;
  }
  std::istringstream in(text);
  PrimalMesh mesh = format == MeshFormat::Gmsh ? parse_gmsh(in) : parse_simple(in);
  canonicalize(mesh);
  return mesh;
}

PrimalMesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open mesh file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mesh_text(buf.str(), format);
}

PrimalMesh box_mesh(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz,
                    const std::function<int(const Vec3&)>& region) {
  require(nx >= 1 && ny >= 1 && nz >= 1, "box_mesh: cell counts must be >= 1");
  require((hi - lo).minCoeff() > 0.0, "box_mesh: box extents must be positive");
  PrimalMesh mesh;
  auto vid = [&](int i, int j, int k) -> index_t {
    return i + (nx + 1) * (static_cast<index_t>(j) + (ny + 1) * k);
  };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        mesh.vertices.push_back(
            {lo[0] + (hi[0] - lo[0]) * i / nx, lo[1] + (hi[1] - lo[1]) * j / ny,
             lo[2] + (hi[2] - lo[2]) * k / nz});

  // Kuhn subdivision: six tets per cell along vertex-order paths from corner 000 to 111.
  constexpr std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& perm : perms) {
          std::array<int, 3> c = {i, j, k};
          std::array<index_t, 4> tet;
          tet[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            c[perm[s]] += 1;
            tet[s + 1] = vid(c[0], c[1], c[2]);
          }
          mesh.tets.push_back(tet);
          Vec3 centroid = (mesh.vertices[tet[0]] + mesh.vertices[tet[1]] +
                           mesh.vertices[tet[2]] + mesh.vertices[tet[3]]) /
                          4.0;
          mesh.regions.push_back(region ? region(centroid) : 0);
        }
  canonicalize(mesh);
  return mesh;
}

PrimalMesh refine_uniform(const PrimalMesh& mesh) {
  PrimalMesh out;
  out.vertices = mesh.vertices;
  // Midpoint ids assigned in lexicographic edge order (independent of tet order).
  std::map<std::array<index_t, 2>, index_t> midpoint;
  for (const auto& tet : mesh.tets)
    for (auto [la, lb] : kLocalEdges)
      midpoint.emplace(std::array<index_t, 2>{std::min(tet[la], tet[lb]),
                                              std::max(tet[la], tet[lb])},
                       0);
  for (auto& [key, id] : midpoint) {
    id = out.vertex_count();
    out.vertices.push_back(0.5 * (mesh.vertices[key[0]] + mesh.vertices[key[1]]));
  }
  auto mid = [&](index_t a, index_t b) {
    return midpoint.at({std::min(a, b), std::max(a, b)});
  };
  for (index_t t = 0; t < mesh.tet_count(); ++t) {
    const auto& v = mesh.tets[t];
    const index_t m01 = mid(v[0], v[1]), m02 = mid(v[0], v[2]), m03 = mid(v[0], v[3]);
    const index_t m12 = mid(v[1], v[2]), m13 = mid(v[1], v[3]), m23 = mid(v[2], v[3]);
    // The interior octahedron is split along the shortest of its three diagonals
    // (ties broken by vertex ids); a fixed choice can leave edges almost as long
    // as the parent's, ruining the h-halving this refinement is used for.
    const std::array<std::array<index_t, 2>, 3> diagonals = {{
        {m01, m23}, {m02, m13}, {m03, m12}}};
    int best = 0;
    auto rank = [&](int k) {
      const auto& d = diagonals[k];
      return std::tuple<double, index_t, index_t>(
          (out.vertices[d[0]] - out.vertices[d[1]]).norm(), std::min(d[0], d[1]),
          std::max(d[0], d[1]));
    };
    for (int k = 1; k < 3; ++k)
      if (rank(k) < rank(best)) best = k;
    const auto [da, db] = diagonals[best];
    // Ring of the four midpoints not on the chosen diagonal, ordered so that
    // consecutive pairs share an octahedron edge.
    std::array<index_t, 4> ring{};
    if (best == 0) ring = {m02, m03, m13, m12};
    if (best == 1) ring = {m01, m03, m23, m12};
    if (best == 2) ring = {m01, m02, m23, m13};
    const std::array<std::array<index_t, 4>, 8> children = {{
        {v[0], m01, m02, m03},
        {v[1], m01, m12, m13},
        {v[2], m02, m12, m23},
        {v[3], m03, m13, m23},
        {da, db, ring[0], ring[1]},
        {da, db, ring[1], ring[2]},
        {da, db, ring[2], ring[3]},
        {da, db, ring[3], ring[0]},
    }};
    for (const auto& child : children) {
      out.tets.push_back(child);
      out.regions.push_back(mesh.regions[t]);
    }
  }
  canonicalize(out);
  return out;
}

PrimalMesh perturb_vertices(const PrimalMesh& mesh, double amplitude, std::uint64_t seed) {
  require(amplitude >= 0.0 && amplitude < 0.5, "perturbation amplitude out of range");
  const index_t nv = mesh.vertex_count();
  Vec3 lo = mesh.vertices.front(), hi = lo;
  for (const Vec3& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec3 extent = hi - lo;

  std::vector<double> min_edge(nv, std::numeric_limits<double>::infinity());
  for (const auto& tet : mesh.tets)
    for (auto [la, lb] : kLocalEdges) {
      double len = (mesh.vertices[tet[la]] - mesh.vertices[tet[lb]]).norm();
      min_edge[tet[la]] = std::min(min_edge[tet[la]], len);
      min_edge[tet[lb]] = std::min(min_edge[tet[lb]], len);
    }

  PrimalMesh out = mesh;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (index_t v = 0; v < nv; ++v) {
    Vec3 offset(unit(rng), unit(rng), unit(rng));  // always drawn, keeps the stream stable
    for (int j = 0; j < 3; ++j) {
      double tol = 1e-9 * std::max(extent[j], 1.0);
      bool pinned = std::abs(mesh.vertices[v][j] - lo[j]) < tol ||
                    std::abs(mesh.vertices[v][j] - hi[j]) < tol;
      if (!pinned) out.vertices[v][j] += amplitude * min_edge[v] * offset[j];
    }
  }
  for (const auto& tet : mesh.tets) {
    double before = signed_volume6(mesh.vertices[tet[0]], mesh.vertices[tet[1]],
                                   mesh.vertices[tet[2]], mesh.vertices[tet[3]]);
    double after = signed_volume6(out.vertices[tet[0]], out.vertices[tet[1]],
                                  out.vertices[tet[2]], out.vertices[tet[3]]);
    require(before * after > 0.0, "perturbation inverted a tetrahedron; lower the amplitude");
  }
  return out;
}

std::uint64_t mesh_hash(const PrimalMesh& mesh) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& v : mesh.vertices) mix(v.data(), 3 * sizeof(double));
  for (const auto& t : mesh.tets) mix(t.data(), 4 * sizeof(index_t));
  for (int r : mesh.regions) mix(&r, sizeof(int));
  return h;
}

}  // namespace dcm
