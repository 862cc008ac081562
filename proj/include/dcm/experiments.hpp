#pragma once

#include "dcm/config.hpp"
#include "dcm/refsol.hpp"
#include "dcm/report.hpp"
#include "dcm/spectral.hpp"

namespace dcm {

// Region tags used by the built-in study meshes.
inline constexpr int kRegionInterior = 0;
inline constexpr int kRegionPml = 1;
inline constexpr int kRegionSphere = 2;

/// Box (0,π)×(0,π/2)×(0,π/4), Kuhn lattice with 2^levels cells per axis:
/// 6·8^levels tets, nested across levels with h halving exactly.
PrimalMesh cavity_mesh(int levels);

/// Unit cube Kuhn lattice with 2^levels cells per axis.
PrimalMesh unit_cube_mesh(int levels);

/// Interior (0,2)×(0,½)×(0,½) plus PML slabs of length ½ on both x ends (tagged
/// kRegionPml); cubic cells of size 1/(2n) so x = 0 and x = 2 are mesh planes;
/// 36 n³ tets. Optionally tags tets whose centroid lies in the ball around
/// (1, ¼, ¼) as kRegionSphere.
PrimalMesh waveguide_mesh(int cells_per_half, bool with_sphere = false,
                          double sphere_radius = 0.15);

struct Discretization {
  PrimalMesh mesh;
  TopologyTables topo;
  DualComplex dual;
  DofSpace electric;
  DofSpace magnetic;
};
Discretization discretize(PrimalMesh mesh, int order);

/// PEC cavity operator set: electric wall DOFs eliminated, curl columns
/// restricted accordingly, both masses factorized.
struct CavitySystem {
  Discretization disc;
  BoundaryConstraint wall;
  MaxwellSystem sys;
};
CavitySystem build_cavity_system(PrimalMesh mesh, int order);

/// Zero-padded expansion of a constrained vector back to the full space.
VectorX prolong(const BoundaryConstraint& bc, const VectorX& kept);

/// Least-squares slope of log(y) against log(x).
double fit_power(const std::vector<double>& x, const std::vector<double>& y);

/// Longest primal edge (the h reported in study tables).
double mesh_width(const PrimalMesh& mesh, const TopologyTables& topo);

struct WaveguideOptions {
  int order = 2;
  int cells_per_half = 1;
  double horizon = 1.0;        // error snapshots cover [0, horizon]
  double run_until = 0.0;      // keep stepping (energy trace only) up to here
  int snapshots = 33;          // count over [0, horizon], Simpson needs it odd
  double sigma = 5.0;          // PML damping strength
  double cfl_safety = 0.9;
  std::uint64_t seed = 20240901;
  bool with_sphere = false;
  double sphere_radius = 0.15;
  double sphere_eps = 9.0;
  double reference_tol = 1e-10;
};

struct WaveguideResult {
  double h = 0.0;
  double dt = 0.0;
  index_t steps = 0;
  std::vector<double> times;    // snapshot times (error window and beyond)
  std::vector<double> errors;   // interior L2 error per snapshot; empty for sphere runs
  std::vector<double> energy;   // interior field energy per snapshot
  double space_time_error = 0.0;
  double peak_energy = 0.0;
  double final_energy = 0.0;
};

/// Driven-waveguide pipeline: mesh, spaces, PML leap-frog with the strong inflow
/// pulse, per-snapshot interior errors against the semi-analytic reference and a
/// Simpson space-time error over [0, horizon]. `snapshot_hook(index, time, disc,
/// e, h)` fires at every snapshot when set.
using SnapshotHook = std::function<void(int, double, const Discretization&, const VectorX&,
                                        const VectorX&)>;
WaveguideResult run_waveguide(const WaveguideOptions& opt, const SnapshotHook& hook = {});

/// Experiment driver behind the CLI; throws Error on bad configuration.
void run_experiment(const std::string& kind, const Config& config, const std::string& out_dir,
                    std::uint64_t seed);

}  // namespace dcm
