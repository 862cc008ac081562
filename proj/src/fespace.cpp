#include "dcm/fespace.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace dcm {
namespace {

int local_vertex(const PrimalMesh& mesh, index_t tet, index_t vtx) {
  const auto& tv = mesh.tets[tet];
  for (int lv = 0; lv < 4; ++lv)
    if (tv[lv] == vtx) return lv;
  throw Error("vertex not in tet");
}

index_t subcell_of(const PrimalMesh& mesh, index_t tet, index_t vtx) {
  return 4 * tet + local_vertex(mesh, tet, vtx);
}

int axis_of_face(const Subcell& sc, index_t face) {
  for (int d = 0; d < 3; ++d)
    if (sc.minus_face[d] == face) return d;
  throw Error("face not adjacent to subcell node");
}

int axis_of_edge(const Subcell& sc, index_t edge) {
  for (int d = 0; d < 3; ++d)
    if (sc.axis_edge[d] == edge) return d;
  throw Error("edge not adjacent to subcell node");
}

int axis_of_vertex(const Subcell& sc, index_t vtx) {
  for (int d = 0; d < 3; ++d)
    if (sc.axis_vertex[d] == vtx) return d;
  throw Error("vertex not an axis target of subcell");
}

struct UnionFind {
  std::vector<index_t> parent;
  explicit UnionFind(index_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  index_t find(index_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(index_t a, index_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Renumbers provisional DOFs so lumped coupling classes are contiguous, preserving
// owner-major order (classes never cross owners), and freezes the block ranges.
void finalize_numbering(DofSpace& sp, std::vector<DofInfo>&& prov, index_t owner_count,
                        const std::vector<index_t>& owner_of) {
  const index_t n = static_cast<index_t>(prov.size());
  const int n1 = sp.nodes_per_axis();
  const int n3 = n1 * n1 * n1;

  for (index_t s = 0; s < static_cast<index_t>(sp.slot_table.size()); ++s)
    require(sp.slot_table[s] >= 0, "uncovered subcell slot");

  UnionFind uf(n);
  for (index_t k = 0; k < sp.subcell_count; ++k)
    for (int a = 0; a < n3; ++a) {
      index_t d0 = sp.slot_table[(k * 3 + 0) * n3 + a];
      uf.unite(d0, sp.slot_table[(k * 3 + 1) * n3 + a]);
      uf.unite(d0, sp.slot_table[(k * 3 + 2) * n3 + a]);
    }

  std::vector<index_t> class_min(n);
  for (index_t d = 0; d < n; ++d) class_min[d] = uf.find(d);  // root == min member

  std::vector<index_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
    return std::tie(class_min[a], a) < std::tie(class_min[b], b);
  });

  std::vector<index_t> final_of(n);
  for (index_t i = 0; i < n; ++i) final_of[order[i]] = i;

  sp.dofs.resize(n);
  for (index_t d = 0; d < n; ++d) sp.dofs[final_of[d]] = std::move(prov[d]);
  for (auto& s : sp.slot_table) s = final_of[s];

  sp.class_ranges.clear();
  sp.owner_ranges.assign(owner_count, {0, 0});
  index_t cls = -1;
  index_t prev_root = -1;
  for (index_t i = 0; i < n; ++i) {
    index_t root = class_min[order[i]];
    if (root != prev_root) {
      sp.class_ranges.push_back({i, i});
      ++cls;
      prev_root = root;
    }
    sp.class_ranges.back()[1] = i + 1;
    sp.dofs[i].lumped_class = cls;
  }
  // owner blocks are contiguous because provisional creation was owner-major and
  // the sort key (class root) stays inside an owner
  index_t pos = 0;
  for (index_t o = 0; o < owner_count; ++o) {
    index_t begin = pos;
    while (pos < n && sp.dofs[pos].owner == owner_of[o]) ++pos;
    sp.owner_ranges[o] = {begin, pos};
  }
  require(pos == n, "owner ranges do not partition the DOFs");
}

}  // namespace

Vec3 DofSpace::slot_node(int alpha) const {
  int n1 = nodes_per_axis();
  auto [a0, a1, a2] = tensor_unpack(n1, alpha);
  double s = (kind == FieldKind::Electric) ? 1.0 : -1.0;
  return {s * node_rule.nodes[a0], s * node_rule.nodes[a1], s * node_rule.nodes[a2]};
}

double DofSpace::shape_value(int alpha, const Vec3& xhat) const {
  int n1 = nodes_per_axis();
  auto [a0, a1, a2] = tensor_unpack(n1, alpha);
  double s = (kind == FieldKind::Electric) ? 1.0 : -1.0;
  return basis.evaluate(a0, s * xhat[0]) * basis.evaluate(a1, s * xhat[1]) *
         basis.evaluate(a2, s * xhat[2]);
}

Vec3 DofSpace::shape_gradient(int alpha, const Vec3& xhat) const {
  int n1 = nodes_per_axis();
  auto [a0, a1, a2] = tensor_unpack(n1, alpha);
  double s = (kind == FieldKind::Electric) ? 1.0 : -1.0;
  std::array<int, 3> a{a0, a1, a2};
  Vec3 val, der;
  for (int d = 0; d < 3; ++d) {
    val[d] = basis.evaluate(a[d], s * xhat[d]);
    der[d] = s * basis.derivative(a[d], s * xhat[d]);
  }
  return {der[0] * val[1] * val[2], val[0] * der[1] * val[2], val[0] * val[1] * der[2]};
}

namespace {

DofSpace make_space(FieldKind kind, const DualComplex& dual, int order) {
  DofSpace sp;
  sp.kind = kind;
  sp.order = order;
  sp.subcell_count = static_cast<index_t>(dual.subcells.size());
  sp.node_rule = gauss_radau(order);
  sp.basis = LagrangeBasis1D(sp.node_rule.nodes);
  sp.slot_table.assign(static_cast<std::size_t>(sp.subcell_count) * sp.slots_per_subcell(), -1);
  return sp;
}

}  // namespace

DofSpace build_electric_space(const PrimalMesh& mesh, const TopologyTables& topo,
                              const DualComplex& dual, int order) {
  require(order >= 1, "order must be at least 1");
  DofSpace sp = make_space(FieldKind::Electric, dual, order);
  const int n1 = order + 1;
  const int n3 = n1 * n1 * n1;
  const index_t nv = static_cast<index_t>(mesh.vertices.size());

  std::vector<DofInfo> prov;
  std::vector<index_t> owner_of(nv);
  std::iota(owner_of.begin(), owner_of.end(), 0);

  auto place = [&](const DofSlot& s, index_t dof) {
    index_t idx = (s.subcell * 3 + s.axis) * n3 + s.alpha;
    require(sp.slot_table[idx] < 0, "subcell slot claimed twice");
    sp.slot_table[idx] = dof;
  };

  for (index_t vtx = 0; vtx < nv; ++vtx) {
    const auto& tets = topo.vertex_tets[vtx];

    // volume DOFs: both cross-axis indices positive, single subcell support
    for (index_t t : tets) {
      index_t k = subcell_of(mesh, t, vtx);
      for (int i = 0; i < 3; ++i) {
        int j = (i + 1) % 3, kk = (i + 2) % 3;
        for (int a = 0; a < n3; ++a) {
          auto [a0, a1, a2] = tensor_unpack(n1, a);
          std::array<int, 3> al{a0, a1, a2};
          if (al[j] == 0 || al[kk] == 0) continue;
          DofInfo d;
          d.family = DofFamily::Cell;
          d.owner = vtx;
          d.slots = {{k, i, a}};
          place(d.slots[0], static_cast<index_t>(prov.size()));
          prov.push_back(std::move(d));
        }
      }
    }

    // face DOFs: conformity face xhat_j = -1 on a primal face containing vtx
    std::set<index_t> faces;
    for (index_t t : tets)
      for (index_t f : topo.tet_faces[t])
        if (std::count(topo.faces[f].begin(), topo.faces[f].end(), vtx)) faces.insert(f);
    for (index_t f : faces) {
      std::vector<index_t> supp;
      for (index_t t : topo.face_tets[f])
        if (t >= 0) supp.push_back(subcell_of(mesh, t, vtx));
      const Subcell& sc1 = dual.subcells[supp[0]];
      int j1 = axis_of_face(sc1, f);
      std::array<int, 2> inface{(j1 + 1) % 3, (j1 + 2) % 3};
      if (inface[0] > inface[1]) std::swap(inface[0], inface[1]);
      for (int i : inface) {
        int other = inface[0] == i ? inface[1] : inface[0];
        for (int ai = 0; ai <= order; ++ai)
          for (int ao = 1; ao <= order; ++ao) {
            std::array<int, 3> al{};
            al[j1] = 0;
            al[i] = ai;
            al[other] = ao;
            DofInfo d;
            d.family = DofFamily::Face;
            d.owner = vtx;
            d.entity_a = f;
            d.entity_b = vtx;
            d.slots.push_back({supp[0], i, tensor_linear(n1, al[0], al[1], al[2])});
            if (supp.size() == 2) {
              const Subcell& sc2 = dual.subcells[supp[1]];
              std::array<int, 3> mu{};  // axis map side 1 -> side 2
              mu[j1] = axis_of_face(sc2, f);
              for (int p : inface) mu[p] = axis_of_vertex(sc2, sc1.axis_vertex[p]);
              std::array<int, 3> al2{};
              for (int p = 0; p < 3; ++p) al2[mu[p]] = al[p];
              d.slots.push_back({supp[1], mu[i], tensor_linear(n1, al2[0], al2[1], al2[2])});
            }
            index_t id = static_cast<index_t>(prov.size());
            for (const auto& s : d.slots) place(s, id);
            prov.push_back(std::move(d));
          }
      }
    }

    // edge DOFs: conformity edge along axis i on a primal edge at vtx; support is
    // every subcell of the edge's tets at this vertex (one per incident tet)
    std::set<index_t> edges;
    for (index_t t : tets)
      for (index_t e : topo.tet_edges[t])
        if (topo.edges[e][0] == vtx || topo.edges[e][1] == vtx) edges.insert(e);
    for (index_t e : edges) {
      for (int ai = 0; ai <= order; ++ai) {
        DofInfo d;
        d.family = DofFamily::Edge;
        d.owner = vtx;
        d.entity_a = e;
        d.entity_b = vtx;
        for (index_t t : topo.edge_tets[e]) {
          index_t k = subcell_of(mesh, t, vtx);
          int a = axis_of_edge(dual.subcells[k], e);
          std::array<int, 3> al{};
          al[a] = ai;
          d.slots.push_back({k, a, tensor_linear(n1, al[0], al[1], al[2])});
        }
        index_t id = static_cast<index_t>(prov.size());
        for (const auto& s : d.slots) place(s, id);
        prov.push_back(std::move(d));
      }
    }
  }

  index_t T = static_cast<index_t>(mesh.tets.size());
  index_t F = static_cast<index_t>(topo.faces.size());
  index_t E = static_cast<index_t>(topo.edges.size());
  index_t expected = 3 * (order + 1) * order * order * (4 * T) +
                     2 * (order + 1) * order * (3 * F) + (order + 1) * (2 * E);
  require(static_cast<index_t>(prov.size()) == expected, "electric DOF count mismatch");

  finalize_numbering(sp, std::move(prov), nv, owner_of);
  return sp;
}

DofSpace build_magnetic_space(const PrimalMesh& mesh, const TopologyTables& topo,
                              const DualComplex& dual, int order) {
  require(order >= 1, "order must be at least 1");
  DofSpace sp = make_space(FieldKind::Magnetic, dual, order);
  const int n1 = order + 1;
  const int n3 = n1 * n1 * n1;
  const index_t T = static_cast<index_t>(mesh.tets.size());

  std::vector<DofInfo> prov;
  std::vector<index_t> owner_of(T);
  std::iota(owner_of.begin(), owner_of.end(), 0);

  auto place = [&](const DofSlot& s, index_t dof) {
    index_t idx = (s.subcell * 3 + s.axis) * n3 + s.alpha;
    require(sp.slot_table[idx] < 0, "subcell slot claimed twice");
    sp.slot_table[idx] = dof;
  };

  for (index_t t = 0; t < T; ++t) {
    // volume DOFs
    for (int lv = 0; lv < 4; ++lv) {
      index_t k = 4 * t + lv;
      for (int i = 0; i < 3; ++i) {
        int j = (i + 1) % 3, kk = (i + 2) % 3;
        for (int a = 0; a < n3; ++a) {
          auto [a0, a1, a2] = tensor_unpack(n1, a);
          std::array<int, 3> al{a0, a1, a2};
          if (al[j] == 0 || al[kk] == 0) continue;
          DofInfo d;
          d.family = DofFamily::Cell;
          d.owner = t;
          d.slots = {{k, i, a}};
          place(d.slots[0], static_cast<index_t>(prov.size()));
          prov.push_back(std::move(d));
        }
      }
    }

    // face DOFs: conformity face xhat_j = +1 on the dual face of a primal edge of t;
    // the two supports sit at the edge's endpoints (magnetic slots are reflected, so
    // the zero cross index means xhat_j = +1 after reflection)
    for (index_t e : topo.tet_edges[t]) {
      index_t va = topo.edges[e][0], vb = topo.edges[e][1];
      index_t ka = subcell_of(mesh, t, va), kb = subcell_of(mesh, t, vb);
      if (ka > kb) std::swap(ka, kb);
      const Subcell& sc1 = dual.subcells[ka];
      const Subcell& sc2 = dual.subcells[kb];
      int j1 = axis_of_vertex(sc1, sc1.node == va ? vb : va);
      int j2 = axis_of_vertex(sc2, sc2.node == va ? vb : va);
      std::array<int, 2> inface{(j1 + 1) % 3, (j1 + 2) % 3};
      if (inface[0] > inface[1]) std::swap(inface[0], inface[1]);
      std::array<int, 3> mu{};
      mu[j1] = j2;
      for (int p : inface) mu[p] = axis_of_vertex(sc2, sc1.axis_vertex[p]);
      for (int i : inface) {
        int other = inface[0] == i ? inface[1] : inface[0];
        for (int ai = 0; ai <= order; ++ai)
          for (int ao = 1; ao <= order; ++ao) {
            std::array<int, 3> al{};
            al[j1] = 0;
            al[i] = ai;
            al[other] = ao;
            std::array<int, 3> al2{};
            for (int p = 0; p < 3; ++p) al2[mu[p]] = al[p];
            DofInfo d;
            d.family = DofFamily::Face;
            d.owner = t;
            d.entity_a = e;
            d.entity_b = t;
            d.slots = {{ka, i, tensor_linear(n1, al[0], al[1], al[2])},
                       {kb, mu[i], tensor_linear(n1, al2[0], al2[1], al2[2])}};
            index_t id = static_cast<index_t>(prov.size());
            for (const auto& s : d.slots) place(s, id);
            prov.push_back(std::move(d));
          }
      }
    }

    // edge DOFs: conformity edge from a face barycentre to the tet barycentre;
    // supports are the three subcells at the face's vertices
    for (index_t f : topo.tet_faces[t]) {
      for (int ai = 0; ai <= order; ++ai) {
        DofInfo d;
        d.family = DofFamily::Edge;
        d.owner = t;
        d.entity_a = f;
        d.entity_b = t;
        for (index_t v : topo.faces[f]) {
          index_t k = subcell_of(mesh, t, v);
          int a = axis_of_face(dual.subcells[k], f);
          std::array<int, 3> al{};
          al[a] = ai;
          d.slots.push_back({k, a, tensor_linear(n1, al[0], al[1], al[2])});
        }
        index_t id = static_cast<index_t>(prov.size());
        for (const auto& s : d.slots) place(s, id);
        prov.push_back(std::move(d));
      }
    }
  }

  index_t expected = 3 * (order + 1) * order * order * (4 * T) +
                     2 * (order + 1) * order * (6 * T) + (order + 1) * (4 * T);
  require(static_cast<index_t>(prov.size()) == expected, "magnetic DOF count mismatch");

  finalize_numbering(sp, std::move(prov), T, owner_of);
  return sp;
}

Vec3 evaluate_global(const DofSpace& space, const DualComplex& dual, index_t dof,
                     index_t subcell, const Vec3& xhat) {
  const DofInfo& d = space.dofs[dof];
  for (const auto& s : d.slots)
    if (s.subcell == subcell) {
      Vec3 vhat = Vec3::Zero();
      vhat[s.axis] = space.shape_value(s.alpha, xhat);
      return piola_covariant(subcell_jacobian(dual.subcells[subcell], xhat), vhat);
    }
  return Vec3::Zero();  // basis functions extend by zero
}

VectorX interpolate(const DofSpace& space, const DualComplex& dual,
                    const std::function<Vec3(const Vec3&)>& field) {
  VectorX coeffs(space.size());
  for (index_t n = 0; n < space.size(); ++n) {
    const DofSlot& s = space.dofs[n].slots.front();
    Vec3 xhat = space.slot_node(s.alpha);
    const Subcell& sc = dual.subcells[s.subcell];
    Mat3 J = subcell_jacobian(sc, xhat);
    coeffs[n] = (J.transpose() * field(subcell_point(sc, xhat)))[s.axis];
  }
  return coeffs;
}

BoundaryConstraint build_constraint(const DofSpace& space,
                                    const std::function<bool(index_t)>& face_pred,
                                    const std::function<bool(index_t)>& edge_pred) {
  require(space.kind == FieldKind::Electric, "constraints apply to the electric space");
  BoundaryConstraint bc;
  bc.full_to_kept.assign(space.size(), -1);
  for (index_t n = 0; n < space.size(); ++n) {
    const DofInfo& d = space.dofs[n];
    bool drop = (d.family == DofFamily::Face && face_pred(d.entity_a)) ||
                (d.family == DofFamily::Edge && edge_pred(d.entity_a));
    if (drop) {
      bc.constrained.push_back(n);
    } else {
      bc.full_to_kept[n] = static_cast<index_t>(bc.kept.size());
      bc.kept.push_back(n);
    }
  }
  return bc;
}

BoundaryConstraint electric_wall_constraint(const DofSpace& space, const TopologyTables& topo) {
  return build_constraint(
      space, [&](index_t f) { return topo.face_boundary[f] != 0; },
      [&](index_t e) { return topo.edge_boundary[e] != 0; });
}

ConformityReport check_conformity(const DofSpace& space, const PrimalMesh& mesh,
                                  const TopologyTables& topo, const DualComplex& dual,
                                  int points_per_axis) {
  if (points_per_axis <= 0) points_per_axis = space.order + 2;
  QuadratureRule1D q = gauss_legendre(points_per_axis);
  ConformityReport rep;

  // collect internal conformity faces as (subcell 1, subcell 2, axis map, side sign)
  struct FacePair {
    index_t k1, k2;
    int j1;
    std::array<int, 3> mu;
    double side;  // xhat_{j} = side on both conformity faces
  };
  std::vector<FacePair> pairs;
  if (space.kind == FieldKind::Electric) {
    for (index_t f = 0; f < static_cast<index_t>(topo.faces.size()); ++f) {
      if (topo.face_tets[f][1] < 0) continue;
      for (index_t vtx : topo.faces[f]) {
        FacePair fp;
        fp.k1 = subcell_of(mesh, topo.face_tets[f][0], vtx);
        fp.k2 = subcell_of(mesh, topo.face_tets[f][1], vtx);
        const Subcell& sc1 = dual.subcells[fp.k1];
        const Subcell& sc2 = dual.subcells[fp.k2];
        fp.j1 = axis_of_face(sc1, f);
        fp.mu[fp.j1] = axis_of_face(sc2, f);
        for (int p = 1; p <= 2; ++p) {
          int d = (fp.j1 + p) % 3;
          fp.mu[d] = axis_of_vertex(sc2, sc1.axis_vertex[d]);
        }
        fp.side = -1.0;
        pairs.push_back(fp);
      }
    }
  } else {
    for (index_t t = 0; t < static_cast<index_t>(mesh.tets.size()); ++t)
      for (index_t e : topo.tet_edges[t]) {
        index_t va = topo.edges[e][0], vb = topo.edges[e][1];
        FacePair fp;
        fp.k1 = subcell_of(mesh, t, va);
        fp.k2 = subcell_of(mesh, t, vb);
        const Subcell& sc1 = dual.subcells[fp.k1];
        const Subcell& sc2 = dual.subcells[fp.k2];
        fp.j1 = axis_of_vertex(sc1, vb);
        fp.mu[fp.j1] = axis_of_vertex(sc2, va);
        for (int p = 1; p <= 2; ++p) {
          int d = (fp.j1 + p) % 3;
          fp.mu[d] = axis_of_vertex(sc2, sc1.axis_vertex[d]);
        }
        fp.side = 1.0;
        pairs.push_back(fp);
      }
  }

  for (const auto& fp : pairs) {
    const Subcell& sc1 = dual.subcells[fp.k1];
    const Subcell& sc2 = dual.subcells[fp.k2];
    std::set<index_t> dofs;
    int n3 = space.nodes_per_axis() * space.nodes_per_axis() * space.nodes_per_axis();
    for (index_t k : {fp.k1, fp.k2})
      for (int s = 0; s < 3 * n3; ++s) dofs.insert(space.slot_table[k * 3 * n3 + s]);

    int p1 = (fp.j1 + 1) % 3, q1 = (fp.j1 + 2) % 3;
    for (int iu = 0; iu < q.size(); ++iu)
      for (int iv = 0; iv < q.size(); ++iv) {
        Vec3 x1;
        x1[fp.j1] = fp.side;
        x1[p1] = q.nodes[iu];
        x1[q1] = q.nodes[iv];
        Vec3 x2;
        for (int d = 0; d < 3; ++d) x2[fp.mu[d]] = x1[d];
        rep.max_geometry = std::max(
            rep.max_geometry, (subcell_point(sc1, x1) - subcell_point(sc2, x2)).norm());

        Mat3 J1 = subcell_jacobian(sc1, x1);
        Vec3 tu = J1.col(p1), tv = J1.col(q1);
        Vec3 nrm = tu.cross(tv).normalized();
        for (index_t dof : dofs) {
          const DofInfo& d = space.dofs[dof];
          auto trace = [&](index_t k, const Vec3& x) -> Vec3 {
            for (const auto& s : d.slots)
              if (s.subcell == k) return evaluate_global(space, dual, dof, k, x);
            return Vec3::Zero();
          };
          Vec3 v1 = trace(fp.k1, x1);
          Vec3 v2 = trace(fp.k2, x2);
          Vec3 jump = v1 - v2;
          jump -= nrm * nrm.dot(jump);
          Vec3 t1 = v1 - nrm * nrm.dot(v1);
          rep.max_trace = std::max({rep.max_trace, t1.norm()});
          rep.max_jump = std::max(rep.max_jump, jump.norm());
        }
      }
  }
  return rep;
}

}  // namespace dcm
