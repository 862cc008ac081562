#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "dcm/fespace.hpp"
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

// Dimension formulas: per component full tensor polynomials on every subcell,
// glued across primal faces / dual faces respectively.
index_t electric_dim(const PrimalMesh& m, const TopologyTables& topo, int p) {
  index_t cells = 4 * m.tet_count();
  index_t face_entities = 3 * topo.face_count();   // one per (face, vertex)
  index_t edge_entities = 2 * topo.edge_count();   // one per (edge, endpoint)
  return 3 * (p + 1) * p * p * cells + 2 * (p + 1) * p * face_entities +
         (p + 1) * edge_entities;
}

index_t magnetic_dim(const PrimalMesh& m, int p) {
  // Per tet: cell part on 4 subcells, one face entity per tet edge, one edge
  // entity per tet face.
  return m.tet_count() *
         (12 * (p + 1) * p * p + 12 * (p + 1) * p + 4 * (p + 1));
}

// Discrete field value from a coefficient vector inside one subcell.
Vec3 eval_field(const DofSpace& sp, const DualComplex& dual, const VectorX& u, index_t sc,
                const Vec3& xhat) {
  const int n = sp.nodes_per_axis();
  const int n3 = n * n * n;
  Vec3 vhat = Vec3::Zero();
  for (int axis = 0; axis < 3; ++axis)
    for (int alpha = 0; alpha < n3; ++alpha)
      vhat[axis] += u[sp.slot_dof(sc, axis, alpha)] * sp.shape_value(alpha, xhat);
  return piola_covariant(subcell_jacobian(dual.subcells[sc], xhat), vhat);
}

}  // namespace

TEST_SUITE("fespace") {

TEST_CASE("dimension counts match the closed formulas") {
  std::vector<PrimalMesh> meshes;
  meshes.push_back(single_tet());
  meshes.push_back(two_tets());
  meshes.push_back(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 2, 2, 2));
  for (const auto& mesh : meshes) {
    for (int p : {1, 2, 3}) {
      CAPTURE(p);
      CAPTURE(mesh.tet_count());
      Spaces s = build(mesh, p);
      CHECK(s.electric.size() == electric_dim(s.mesh, s.topo, p));
      CHECK(s.magnetic.size() == magnetic_dim(s.mesh, p));
    }
  }
  // The known single-tet P=1 values, frozen.
  Spaces s = build(single_tet(), 1);
  CHECK(s.electric.size() == 96);
  CHECK(s.magnetic.size() == 56);
}

TEST_CASE("every slot is covered exactly once") {
  Spaces s = build(two_tets(), 2);
  for (const DofSpace* sp : {&s.electric, &s.magnetic}) {
    const int n3 = sp->nodes_per_axis() * sp->nodes_per_axis() * sp->nodes_per_axis();
    index_t total_slots = 0;
    for (index_t d = 0; d < sp->size(); ++d) {
      std::set<std::array<index_t, 3>> seen;
      for (const DofSlot& slot : sp->dofs[d].slots) {
        CHECK(sp->slot_dof(slot.subcell, slot.axis, slot.alpha) == d);
        CHECK(seen.insert({slot.subcell, slot.axis, slot.alpha}).second);
      }
      total_slots += static_cast<index_t>(sp->dofs[d].slots.size());
    }
    CHECK(total_slots == 3 * n3 * s.dual.subcell_count());
    for (index_t sc = 0; sc < s.dual.subcell_count(); ++sc)
      for (int axis = 0; axis < 3; ++axis)
        for (int alpha = 0; alpha < n3; ++alpha)
          CHECK(sp->slot_dof(sc, axis, alpha) >= 0);
  }
}

TEST_CASE("support sizes follow entity valence") {
  Spaces s = build(two_tets(), 2);

  for (index_t d = 0; d < s.electric.size(); ++d) {
    const DofInfo& info = s.electric.dofs[d];
    std::size_t n = info.slots.size();
    if (info.family == DofFamily::Cell) {
      CHECK(n == 1);
    } else if (info.family == DofFamily::Face) {
      index_t face = info.entity_a;
      std::size_t valence = s.topo.face_boundary[face] ? 1 : 2;
      CHECK(n == valence);
    } else {
      index_t edge = info.entity_a;
      CHECK(n == s.topo.edge_tets[edge].size());
    }
  }
  for (index_t d = 0; d < s.magnetic.size(); ++d) {
    const DofInfo& info = s.magnetic.dofs[d];
    std::size_t n = info.slots.size();
    if (info.family == DofFamily::Cell) CHECK(n == 1);
    if (info.family == DofFamily::Face) CHECK(n == 2);  // two dual cells per tet edge
    if (info.family == DofFamily::Edge) CHECK(n == 3);  // three subcells ring a dual edge
  }

  // Cell-centred counts agree between the spaces (construction symmetry).
  auto cell_count = [](const DofSpace& sp) {
    return std::count_if(sp.dofs.begin(), sp.dofs.end(),
                         [](const DofInfo& i) { return i.family == DofFamily::Cell; });
  };
  CHECK(cell_count(s.electric) == cell_count(s.magnetic));
}

TEST_CASE("owner and class ranges partition the numbering") {
  Spaces s = build(two_tets(), 2);
  for (const DofSpace* sp : {&s.electric, &s.magnetic}) {
    index_t cursor = 0;
    for (const auto& r : sp->owner_ranges) {
      CHECK(r[0] == cursor);
      CHECK(r[1] > r[0]);
      cursor = r[1];
    }
    CHECK(cursor == sp->size());
    cursor = 0;
    for (const auto& r : sp->class_ranges) {
      CHECK(r[0] == cursor);
      CHECK(r[1] > r[0]);
      // All members of a lumped class share the owner.
      for (index_t d = r[0]; d < r[1]; ++d)
        CHECK(sp->dofs[d].owner == sp->dofs[r[0]].owner);
      cursor = r[1];
    }
    CHECK(cursor == sp->size());
  }
}

TEST_CASE("electric wall constraint removes boundary trace carriers") {
  Spaces s = build(single_tet(), 1);
  BoundaryConstraint bc = electric_wall_constraint(s.electric, s.topo);
  // Single tet: every face/edge is boundary, only the 24 cell DOFs survive.
  CHECK(bc.kept_count() == 24);
  CHECK(static_cast<index_t>(bc.constrained.size()) == s.electric.size() - 24);
  CHECK(std::is_sorted(bc.kept.begin(), bc.kept.end()));
  CHECK(std::is_sorted(bc.constrained.begin(), bc.constrained.end()));
  for (index_t n : bc.kept) CHECK(bc.full_to_kept[n] >= 0);
  for (index_t n : bc.constrained) CHECK(bc.full_to_kept[n] == -1);
  for (index_t n : bc.kept) CHECK(s.electric.dofs[n].family == DofFamily::Cell);

  CHECK_THROWS_AS(electric_wall_constraint(s.magnetic, s.topo), Error);
}

TEST_CASE("custom constraint predicates select entities") {
  Spaces s = build(single_tet(), 1);
  index_t target_face = 0;
  BoundaryConstraint bc = build_constraint(
      s.electric, [&](index_t f) { return f == target_face; }, [](index_t) { return false; });
  // One face carries 3 (face,vertex) entities with 2(P+1)P DOFs each.
  CHECK(static_cast<index_t>(bc.constrained.size()) == 3 * 2 * 2 * 1);
  for (index_t n : bc.constrained) {
    CHECK(s.electric.dofs[n].family == DofFamily::Face);
    CHECK(s.electric.dofs[n].entity_a == target_face);
  }
}

TEST_CASE("interpolation reproduces constant fields exactly") {
  PrimalMesh mesh = perturb_vertices(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 1, 1, 1), 0.2, 9);
  const Vec3 c(0.3, -0.7, 0.2);
  for (int p : {1, 2}) {
    CAPTURE(p);
    Spaces s = build(mesh, p);
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> dist(-0.95, 0.95);
    for (const DofSpace* sp : {&s.electric, &s.magnetic}) {
      VectorX u = interpolate(*sp, s.dual, [&](const Vec3&) { return c; });
      for (int trial = 0; trial < 12; ++trial) {
        index_t sc = static_cast<index_t>(trial) % s.dual.subcell_count();
        Vec3 xhat(dist(rng), dist(rng), dist(rng));
        CHECK((eval_field(*sp, s.dual, u, sc, xhat) - c).norm() <= 1e-12);
      }
    }
  }
}

TEST_CASE("interpolation reproduces linear fields for P >= 2") {
  PrimalMesh mesh = perturb_vertices(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 1, 1, 1), 0.2, 10);
  Mat3 a;
  a << 0.2, -0.5, 0.1, 0.7, 0.3, -0.2, -0.4, 0.6, 0.5;
  Vec3 b(0.1, -0.3, 0.8);
  auto field = [&](const Vec3& x) { return Vec3(a * x + b); };
  Spaces s = build(mesh, 2);
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> dist(-0.95, 0.95);
  for (const DofSpace* sp : {&s.electric, &s.magnetic}) {
    VectorX u = interpolate(*sp, s.dual, field);
    for (int trial = 0; trial < 12; ++trial) {
      index_t sc = static_cast<index_t>(trial) % s.dual.subcell_count();
      Vec3 xhat(dist(rng), dist(rng), dist(rng));
      Vec3 x = subcell_point(s.dual.subcells[sc], xhat);
      CHECK((eval_field(*sp, s.dual, u, sc, xhat) - field(x)).norm() <= 1e-11);
    }
  }
}

TEST_CASE("evaluate_global matches the slot expansion and extends by zero") {
  Spaces s = build(two_tets(), 1);
  for (const DofSpace* sp : {&s.electric, &s.magnetic}) {
    VectorX u = VectorX::Zero(sp->size());
    // A multi-slot DOF if one exists, else any.
    index_t dof = 0;
    for (index_t d = 0; d < sp->size(); ++d)
      if (sp->dofs[d].slots.size() > 1) {
        dof = d;
        break;
      }
    u[dof] = 1.0;
    const Vec3 xhat(0.3, -0.2, 0.6);
    std::set<index_t> support;
    for (const auto& slot : sp->dofs[dof].slots) support.insert(slot.subcell);
    for (index_t sc = 0; sc < s.dual.subcell_count(); ++sc) {
      Vec3 direct = evaluate_global(*sp, s.dual, dof, sc, xhat);
      Vec3 expanded = eval_field(*sp, s.dual, u, sc, xhat);
      CHECK((direct - expanded).norm() <= 1e-13);
      if (!support.count(sc)) CHECK(direct.norm() == 0.0);
    }
  }
}

TEST_CASE("slot nodes are collocation points of the shape functions") {
  Spaces s = build(single_tet(), 2);
  for (const DofSpace* sp : {&s.electric, &s.magnetic}) {
    const int n = sp->nodes_per_axis();
    for (int alpha = 0; alpha < n * n * n; ++alpha) {
      for (int beta = 0; beta < n * n * n; ++beta) {
        double v = sp->shape_value(beta, sp->slot_node(alpha));
        CHECK(v == (alpha == beta ? 1.0 : 0.0));
      }
    }
  }
}

TEST_CASE("tangential conformity holds on a distorted mesh") {
  PrimalMesh mesh = perturb_vertices(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 1, 1, 1), 0.25, 5);
  for (int p : {1, 2, 3}) {
    CAPTURE(p);
    Spaces s = build(mesh, p);
    for (const DofSpace* sp : {&s.electric, &s.magnetic}) {
      ConformityReport rep = check_conformity(*sp, s.mesh, s.topo, s.dual);
      CHECK(rep.max_trace > 0.0);
      CHECK(rep.max_geometry <= 1e-12);
      CHECK(rep.max_jump <= 1e-12 * std::max(1.0, rep.max_trace));
    }
  }
}

}  // TEST_SUITE
