#pragma once

#include <array>
#include <functional>
#include <vector>

#include "dcm/dualgrid.hpp"
#include "dcm/polybasis.hpp"

namespace dcm {

enum class FieldKind { Electric, Magnetic };
enum class DofFamily { Cell, Face, Edge };

/// One appearance of a global DOF inside a subcell: reference function
/// l_alpha(xhat) e_axis (electric) or l_alpha(-xhat) e_axis (magnetic), pushed
/// forward by the covariant transform. All cross-subcell identifications carry
/// sign +1 (the shared corner pinning makes reflections impossible).
struct DofSlot {
  index_t subcell;
  int axis;
  int alpha;  // linearized multi-index, axis 0 fastest
};

struct DofInfo {
  DofFamily family;
  index_t owner;            // dual cell (primal vertex) or primal tet
  index_t entity_a = -1;    // Face: face id (electric) / edge id (magnetic)
  index_t entity_b = -1;    // Face: vertex (electric) / tet (magnetic); Edge analogous
  index_t lumped_class = -1;
  std::vector<DofSlot> slots;
};

/// Curl-conforming tensor-product space on the subcell complex. Electric variant
/// conforms across subcell faces lying on primal faces (within each dual cell),
/// magnetic variant across subcell faces on dual faces (within each tet). DOFs are
/// numbered owner-major and, within an owner, grouped by lumped-quadrature coupling
/// class, so both mass layouts are contiguous-block diagonal.
struct DofSpace {
  FieldKind kind;
  int order = 0;
  index_t subcell_count = 0;
  LagrangeBasis1D basis{VectorX::Ones(1)};
  QuadratureRule1D node_rule;  // Gauss-Radau rule the basis collocates
  std::vector<DofInfo> dofs;
  std::vector<index_t> slot_table;  // [(subcell*3 + axis)*(P+1)^3 + alpha] -> dof
  std::vector<std::array<index_t, 2>> owner_ranges;
  std::vector<std::array<index_t, 2>> class_ranges;

  index_t size() const { return static_cast<index_t>(dofs.size()); }
  int nodes_per_axis() const { return order + 1; }
  int slots_per_subcell() const {
    int n = nodes_per_axis();
    return 3 * n * n * n;
  }
  index_t slot_dof(index_t subcell, int axis, int alpha) const {
    int n3 = nodes_per_axis() * nodes_per_axis() * nodes_per_axis();
    return slot_table[(subcell * 3 + axis) * n3 + alpha];
  }
  /// Reference node of a slot's collocation point (reflected for magnetic).
  Vec3 slot_node(int alpha) const;
  /// Scalar tensor factor of slot (axis, alpha) at xhat.
  double shape_value(int alpha, const Vec3& xhat) const;
  Vec3 shape_gradient(int alpha, const Vec3& xhat) const;
};

DofSpace build_electric_space(const PrimalMesh& mesh, const TopologyTables& topo,
                              const DualComplex& dual, int order);
DofSpace build_magnetic_space(const PrimalMesh& mesh, const TopologyTables& topo,
                              const DualComplex& dual, int order);

/// Physical field value of one global DOF inside a subcell; zero when the DOF
/// has no slot there (basis functions extend by zero).
Vec3 evaluate_global(const DofSpace& space, const DualComplex& dual, index_t dof,
                     index_t subcell, const Vec3& xhat);

/// Coefficients reproducing `field` at the collocation nodes (covariant pullback
/// component per slot; shared DOFs take their first slot, which is well defined
/// for tangential data by conformity).
VectorX interpolate(const DofSpace& space, const DualComplex& dual,
                    const std::function<Vec3(const Vec3&)>& field);

/// Reduction of the electric space by removal of tangential-trace carriers.
struct BoundaryConstraint {
  std::vector<index_t> kept;          // ascending
  std::vector<index_t> constrained;   // ascending
  std::vector<index_t> full_to_kept;  // -1 where constrained
  index_t kept_count() const { return static_cast<index_t>(kept.size()); }
};

/// Constrains face-centred DOFs whose conformity face satisfies face_pred and
/// edge-centred DOFs whose primal edge satisfies edge_pred.
BoundaryConstraint build_constraint(const DofSpace& space,
                                    const std::function<bool(index_t)>& face_pred,
                                    const std::function<bool(index_t)>& edge_pred);

/// Electric-wall (PEC) constraint: all boundary faces/edges.
BoundaryConstraint electric_wall_constraint(const DofSpace& space, const TopologyTables& topo);

struct ConformityReport {
  double max_jump = 0.0;       // worst tangential jump across internal conformity faces
  double max_trace = 0.0;      // scale of tangential traces seen
  double max_geometry = 0.0;   // worst face-point mismatch between the two sides
};

/// Samples every basis function's tangential trace from both sides of every internal
/// conformity face on a tensor Gauss grid.
ConformityReport check_conformity(const DofSpace& space, const PrimalMesh& mesh,
                                  const TopologyTables& topo, const DualComplex& dual,
                                  int points_per_axis = 0);

}  // namespace dcm
