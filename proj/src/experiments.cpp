#include "dcm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <utility>

namespace dcm {

// The dyadic Kuhn lattices are self-similar: the level-(l+1) mesh refines the
// level-l one tet by tet, so these sequences are genuinely nested with h
// halving exactly per level.
PrimalMesh cavity_mesh(int levels) {
  require(levels >= 0 && levels < 16, "refinement level out of range");
  const double pi = std::acos(-1.0);
  const int n = 1 << levels;
  return box_mesh(Vec3(0, 0, 0), Vec3(pi, 0.5 * pi, 0.25 * pi), n, n, n);
}

PrimalMesh unit_cube_mesh(int levels) {
  require(levels >= 0 && levels < 16, "refinement level out of range");
  const int n = 1 << levels;
  return box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), n, n, n);
}

PrimalMesh waveguide_mesh(int cells_per_half, bool with_sphere, double sphere_radius) {
  require(cells_per_half >= 1, "resolution must be at least 1");
  const Vec3 center(1.0, 0.25, 0.25);
  auto region = [=](const Vec3& c) {
    if (with_sphere && (c - center).norm() < sphere_radius) return kRegionSphere;
    if (c[0] < 0.0 || c[0] > 2.0) return kRegionPml;
    return kRegionInterior;
  };
  const int n = cells_per_half;
  return box_mesh(Vec3(-0.5, 0, 0), Vec3(2.5, 0.5, 0.5), 6 * n, n, n, region);
}

Discretization discretize(PrimalMesh mesh, int order) {
  Discretization d;
  d.mesh = std::move(mesh);
  d.topo = build_topology(d.mesh);
  d.dual = build_dual(d.mesh, d.topo);
  d.electric = build_electric_space(d.mesh, d.topo, d.dual, order);
  d.magnetic = build_magnetic_space(d.mesh, d.topo, d.dual, order);
  return d;
}

CavitySystem build_cavity_system(PrimalMesh mesh, int order) {
  CavitySystem cs;
  cs.disc = discretize(std::move(mesh), order);
  cs.wall = electric_wall_constraint(cs.disc.electric, cs.disc.topo);
  CsrMatrix full_curl = assemble_curl(cs.disc.magnetic, cs.disc.electric);
  cs.sys.curl = restrict_columns(full_curl, cs.wall.full_to_kept, cs.wall.kept_count());
  BlockDiagMatrix full_mass =
      assemble_lumped_mass(cs.disc.electric, cs.disc.dual, constant_material(1.0));
  cs.sys.mass_e = constrain_mass(full_mass, cs.wall).reduced;
  cs.sys.mass_e.factorize();
  cs.sys.mass_h = assemble_lumped_mass(cs.disc.magnetic, cs.disc.dual, constant_material(1.0));
  return cs;
}

VectorX prolong(const BoundaryConstraint& bc, const VectorX& kept) {
  require(kept.size() == bc.kept_count(), "kept vector does not match the constraint");
  VectorX full = VectorX::Zero(bc.full_to_kept.size());
  for (index_t k = 0; k < bc.kept_count(); ++k) full[bc.kept[k]] = kept[k];
  return full;
}

double fit_power(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "power fit needs two or more samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "power fit needs positive data");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(x.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double mesh_width(const PrimalMesh& mesh, const TopologyTables& topo) {
  double h = 0.0;
  for (const auto& e : topo.edges)
    h = std::max(h, (mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm());
  return h;
}

namespace {

bool on_plane_x0(const PrimalMesh& mesh, index_t vertex) {
  return std::abs(mesh.vertices[vertex][0]) < 1e-9;
}

}  // namespace

WaveguideResult run_waveguide(const WaveguideOptions& opt, const SnapshotHook& hook) {
  require(opt.snapshots >= 3 && opt.snapshots % 2 == 1,
          "snapshot count must be odd (Simpson weights) and at least 3");
  require(opt.horizon > 0.0, "horizon must be positive");
  const double kappa = 2.0 * std::acos(-1.0);

  Discretization disc =
      discretize(waveguide_mesh(opt.cells_per_half, opt.with_sphere, opt.sphere_radius),
                 opt.order);
  const PrimalMesh& mesh = disc.mesh;
  const TopologyTables& topo = disc.topo;

  MaterialFn epsilon = opt.with_sphere
                           ? region_material(mesh, {1.0, 1.0, opt.sphere_eps})
                           : constant_material(1.0);
  MaxwellSystem sys;
  sys.curl = assemble_curl(disc.magnetic, disc.electric);
  sys.mass_e = assemble_lumped_mass(disc.electric, disc.dual, epsilon);
  sys.mass_h = assemble_lumped_mass(disc.magnetic, disc.dual, constant_material(1.0));

  PmlSpec spec;
  spec.axis = 0;
  spec.intervals = {{-0.5, 0.0}, {2.0, 2.5}};
  spec.sigma = opt.sigma;
  PmlMatrices pml = assemble_pml(disc.electric, disc.magnetic, mesh, disc.dual, spec);

  // Constrained set: PEC walls plus the driven plane x = 0 (an interior plane).
  auto face_constrained = [&](index_t f) {
    if (topo.face_boundary[f]) return true;
    const auto& v = topo.faces[f];
    return on_plane_x0(mesh, v[0]) && on_plane_x0(mesh, v[1]) && on_plane_x0(mesh, v[2]);
  };
  auto edge_constrained = [&](index_t e) {
    if (topo.edge_boundary[e]) return true;
    const auto& v = topo.edges[e];
    return on_plane_x0(mesh, v[0]) && on_plane_x0(mesh, v[1]);
  };
  BoundaryConstraint bc = build_constraint(disc.electric, face_constrained, edge_constrained);
  auto face_driven = [&](index_t f) {
    const auto& v = topo.faces[f];
    return on_plane_x0(mesh, v[0]) && on_plane_x0(mesh, v[1]) && on_plane_x0(mesh, v[2]);
  };
  auto edge_driven = [&](index_t e) {
    const auto& v = topo.edges[e];
    return on_plane_x0(mesh, v[0]) && on_plane_x0(mesh, v[1]);
  };
  auto pulse_field = [kappa](double t, const Vec3& x) {
    return Vec3(0.0, 0.0, inflow_pulse(t) * std::sin(kappa * x[1]));
  };
  StrongInflow inflow = make_strong_inflow(disc.electric, disc.dual, std::move(bc), face_driven,
                                           edge_driven, pulse_field);

  WaveguideResult result;
  result.h = 0.5 / static_cast<double>(opt.cells_per_half);
  double dt_max = cfl_max_timestep(sys, opt.seed);
  double snap_dt = opt.horizon / static_cast<double>(opt.snapshots - 1);
  index_t per_snap = static_cast<index_t>(std::ceil(snap_dt / (opt.cfl_safety * dt_max)));
  result.dt = snap_dt / static_cast<double>(per_snap);

  auto interior = [&](index_t tet) { return mesh.regions[tet] != kRegionPml; };
  BlockDiagMatrix mass_int_e = assemble_lumped_restricted(disc.electric, disc.dual, epsilon, interior);
  BlockDiagMatrix mass_int_h =
      assemble_lumped_restricted(disc.magnetic, disc.dual, constant_material(1.0), interior);

  const bool measure = !opt.with_sphere;
  PmlLeapfrog stepper(sys, pml, opt.sigma, result.dt, VectorX::Zero(sys.curl.cols),
                      VectorX::Zero(sys.curl.rows), std::move(inflow));

  int total_snaps = opt.snapshots;
  if (opt.run_until > opt.horizon)
    total_snaps += static_cast<int>(std::ceil((opt.run_until - opt.horizon) / snap_dt));

  for (int k = 0; k < total_snaps; ++k) {
    double t = snap_dt * static_cast<double>(k);
    if (k > 0) stepper.advance(per_snap);
    result.times.push_back(t);
    double energy = mass_int_e.quadratic(stepper.e()) + mass_int_h.quadratic(stepper.h());
    result.energy.push_back(energy);
    if (measure && k < opt.snapshots) {
      WaveguideSnapshot ref(t, kappa, 2.0, 2001, opt.reference_tol);
      auto exact = [&](const Vec3& x) {
        if (x[0] < -1e-12 || x[0] > 2.0 + 1e-12) return Vec3(0, 0, 0);
        return Vec3(0.0, 0.0, ref.eval(x[0]) * std::sin(kappa * x[1]));
      };
      VectorX diff = stepper.e() - interpolate(disc.electric, disc.dual, exact);
      result.errors.push_back(std::sqrt(mass_int_e.quadratic(diff)));
    }
    if (hook) hook(k, t, disc, stepper.e(), stepper.h());
  }
  result.steps = stepper.step();
  result.peak_energy = *std::max_element(result.energy.begin(), result.energy.end());
  result.final_energy = result.energy.back();

  if (measure) {
    // Simpson in time on the squared error over [0, horizon].
    double sum = 0.0;
    for (int k = 0; k < opt.snapshots; ++k) {
      double w = (k == 0 || k == opt.snapshots - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      sum += w * result.errors[k] * result.errors[k];
    }
    result.space_time_error = std::sqrt(sum * snap_dt / 3.0);
  }
  return result;
}

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

using Extras = std::vector<std::pair<std::string, std::string>>;

void sparsity_experiment(const Config& config, const std::string& out, std::uint64_t) {
  std::vector<int> orders = config.integers_or("study", "orders", {1, 2, 3, 4});
  int levels = static_cast<int>(config.integer_or("mesh", "refine", 1));
  PrimalMesh mesh = unit_cube_mesh(levels);

  CsvWriter csv(join(out, "sparsity.csv"),
                {"order", "space", "mode", "rows", "nnz", "nnz_per_row"});
  CsvWriter hist(join(out, "nnz_histogram.csv"),
                 {"order", "space", "mode", "nnz_per_row", "row_count"});
  Extras extras;
  for (int order : orders) {
    Discretization disc = discretize(mesh, order);
    struct Entry {
      const char* space;
      const DofSpace* sp;
    };
    for (const Entry& entry : {Entry{"electric", &disc.electric}, Entry{"magnetic", &disc.magnetic}}) {
      for (int mode = 0; mode < 2; ++mode) {
        BlockDiagMatrix m =
            mode == 0 ? assemble_lumped_mass(*entry.sp, disc.dual, constant_material(1.0))
                      : assemble_consistent_mass(*entry.sp, disc.dual, constant_material(1.0));
        const char* mode_name = mode == 0 ? "lumped" : "consistent";
        index_t nnz = m.nonzero_count();
        csv.row({CsvWriter::cell(static_cast<index_t>(order)), entry.space, mode_name,
                 CsvWriter::cell(m.dim), CsvWriter::cell(nnz),
                 CsvWriter::cell(static_cast<double>(nnz) / static_cast<double>(m.dim))});
        std::map<index_t, index_t> rows;
        for (const MatrixX& block : m.blocks)
          for (index_t r = 0; r < block.rows(); ++r) {
            index_t count = 0;
            for (index_t c = 0; c < block.cols(); ++c)
              if (block(r, c) != 0.0) ++count;
            ++rows[count];
          }
        for (const auto& [per_row, count] : rows)
          hist.row({CsvWriter::cell(static_cast<index_t>(order)), entry.space, mode_name,
                    CsvWriter::cell(per_row), CsvWriter::cell(count)});
      }
    }
    if (order <= 2) {
      CsrMatrix curl = assemble_curl(disc.magnetic, disc.electric);
      write_matrix_market(join(out, "curl_p" + std::to_string(order) + ".mtx"), curl);
    }
    if (order == orders.front()) {
      write_vtk_subcells(join(out, "subcells.vtk"), disc.mesh, disc.dual);
      write_dof_table(join(out, "dof_table_electric.csv"), disc.electric);
      extras.emplace_back("mesh_quality", format_number(mesh_quality(disc.dual)));
    }
  }
  write_manifest(join(out, "manifest.txt"), config, mesh, extras);
}

void eigen_experiment(const Config& config, const std::string& out, std::uint64_t seed) {
  std::vector<int> orders = config.integers_or("study", "orders", {2, 3});
  std::vector<int> levels = config.integers_or("study", "refinements", {0, 1, 2});
  int count = static_cast<int>(config.integer_or("spectral", "count", 8));
  double window_lo = config.number_or("spectral", "window_lo", 1.0);
  double window_hi = config.number_or("spectral", "window_hi", 15.0);
  double rtol = config.number_or("spectral", "rtol", 0.05);
  LanczosOptions lopt;
  lopt.kernel_rtol = config.number_or("spectral", "kernel_rtol", 1e-8);
  lopt.max_basis = static_cast<int>(config.integer_or("spectral", "max_basis", 180));
  lopt.seed = seed;
  bool vtk = config.flag_or("output", "vtk", false);

  const double pi = std::acos(-1.0);
  std::vector<double> analytic =
      cavity_eigenvalues(Vec3(pi, 0.5 * pi, 0.25 * pi), 2.0 * window_hi);

  CsvWriter table(join(out, "eigenvalues.csv"),
                  {"order", "level", "h", "index", "lambda", "nearest_analytic", "rel_error",
                   "residual"});
  CsvWriter scan_csv(join(out, "spurious_scan.csv"),
                     {"order", "level", "checked", "matched", "flagged"});
  CsvWriter eoc_csv(join(out, "eigen_eoc.csv"), {"order", "fine_level", "lambda", "rate"});

  Extras extras;
  PrimalMesh last_mesh;
  for (int order : orders) {
    std::vector<double> lambda2_errors, widths;
    for (int level : levels) {
      CavitySystem cs = build_cavity_system(cavity_mesh(level), order);
      double h = mesh_width(cs.disc.mesh, cs.disc.topo);
      EigenResult res = solve_smallest(cs.sys, count, lopt);
      std::vector<double> values;
      for (std::size_t i = 0; i < res.pairs.size(); ++i) {
        const EigenPair& p = res.pairs[i];
        values.push_back(p.value);
        double nearest = analytic.front();
        for (double a : analytic)
          if (std::abs(a - p.value) < std::abs(nearest - p.value)) nearest = a;
        table.row({CsvWriter::cell(static_cast<index_t>(order)),
                   CsvWriter::cell(static_cast<index_t>(level)), CsvWriter::cell(h),
                   CsvWriter::cell(static_cast<index_t>(i)), CsvWriter::cell(p.value),
                   CsvWriter::cell(nearest),
                   CsvWriter::cell(std::abs(p.value - nearest) / nearest),
                   CsvWriter::cell(p.residual)});
      }
      SpuriousReport scan = spurious_scan(values, analytic, window_lo, window_hi, rtol);
      scan_csv.row({CsvWriter::cell(static_cast<index_t>(order)),
                    CsvWriter::cell(static_cast<index_t>(level)), CsvWriter::cell(scan.checked),
                    CsvWriter::cell(scan.matched),
                    CsvWriter::cell(static_cast<index_t>(scan.flagged.size()))});

      // Track λ₂ = 8 for the convergence-rate table.
      double best = res.pairs.empty() ? 0.0 : res.pairs.front().value;
      const EigenPair* best_pair = nullptr;
      for (const EigenPair& p : res.pairs)
        if (best_pair == nullptr || std::abs(p.value - 8.0) < std::abs(best - 8.0)) {
          best = p.value;
          best_pair = &p;
        }
      lambda2_errors.push_back(std::abs(best - 8.0));
      widths.push_back(h);
      extras.emplace_back(
          "lanczos_p" + std::to_string(order) + "_l" + std::to_string(level),
          std::to_string(res.iterations) + " iterations, " + std::to_string(res.restarts) +
              " restarts, lambda_max " + format_number(res.lambda_max));

      if (vtk && best_pair != nullptr && level == levels.back()) {
        VectorX full = prolong(cs.wall, best_pair->e);
        write_vtk_field(join(out, "eigenvector_p" + std::to_string(order) + ".vtk"),
                        cs.disc.electric, cs.disc.dual, full, "E");
      }
      if (order == orders.back() && level == levels.back()) last_mesh = cs.disc.mesh;
    }
    for (std::size_t i = 1; i < lambda2_errors.size(); ++i) {
      if (lambda2_errors[i] == 0.0 || lambda2_errors[i - 1] == 0.0) continue;
      double rate = std::log(lambda2_errors[i - 1] / lambda2_errors[i]) /
                    std::log(widths[i - 1] / widths[i]);
      eoc_csv.row({CsvWriter::cell(static_cast<index_t>(order)),
                   CsvWriter::cell(static_cast<index_t>(levels[i])), CsvWriter::cell(8.0),
                   CsvWriter::cell(rate)});
    }
  }
  write_manifest(join(out, "manifest.txt"), config, last_mesh, extras);
}

void cfl_experiment(const Config& config, const std::string& out, std::uint64_t seed) {
  std::vector<int> orders = config.integers_or("study", "orders", {1, 2, 3, 4});
  std::vector<int> levels = config.integers_or("study", "refinements", {0, 1, 2});
  int order_for_h = static_cast<int>(config.integer_or("study", "order_for_h", 2));
  int level_for_p = static_cast<int>(config.integer_or("study", "level_for_p", 1));

  CsvWriter csv(join(out, "cfl.csv"), {"study", "order", "level", "x", "dt_max"});
  Extras extras;
  PrimalMesh last_mesh;

  std::vector<double> hs, dts;
  for (int level : levels) {
    CavitySystem cs = build_cavity_system(cavity_mesh(level), order_for_h);
    double h = mesh_width(cs.disc.mesh, cs.disc.topo);
    double dt = cfl_max_timestep(cs.sys, seed);
    hs.push_back(h);
    dts.push_back(dt);
    csv.row({"h", CsvWriter::cell(static_cast<index_t>(order_for_h)),
             CsvWriter::cell(static_cast<index_t>(level)), CsvWriter::cell(h),
             CsvWriter::cell(dt)});
    last_mesh = cs.disc.mesh;
  }
  extras.emplace_back("h_exponent", format_number(fit_power(hs, dts)));

  std::vector<double> ps, pdts;
  for (int order : orders) {
    CavitySystem cs = build_cavity_system(cavity_mesh(level_for_p), order);
    double dt = cfl_max_timestep(cs.sys, seed);
    ps.push_back(static_cast<double>(order + 1));
    pdts.push_back(dt);
    csv.row({"p", CsvWriter::cell(static_cast<index_t>(order)),
             CsvWriter::cell(static_cast<index_t>(level_for_p)),
             CsvWriter::cell(static_cast<double>(order + 1)), CsvWriter::cell(dt)});
  }
  extras.emplace_back("p_exponent", format_number(fit_power(ps, pdts)));
  write_manifest(join(out, "manifest.txt"), config, last_mesh, extras);
}

void waveguide_experiment(const Config& config, const std::string& out, std::uint64_t seed) {
  std::vector<int> orders = config.integers_or("study", "orders", {2, 3});
  std::vector<int> resolutions = config.integers_or("study", "resolutions", {1, 2, 3});
  WaveguideOptions base;
  base.horizon = config.number_or("time", "horizon", 1.0);
  base.snapshots = static_cast<int>(config.integer_or("time", "snapshots", 33));
  base.cfl_safety = config.number_or("time", "cfl_safety", 0.9);
  base.run_until = config.number_or("time", "run_until", 0.0);
  base.sigma = config.number_or("pml", "sigma", 5.0);
  base.seed = seed;
  bool vtk = config.flag_or("output", "vtk", false);
  int vtk_stride = static_cast<int>(config.integer_or("output", "vtk_stride", 8));

  CsvWriter errors_csv(join(out, "waveguide_errors.csv"),
                       {"order", "resolution", "h", "time", "error", "interior_energy"});
  CsvWriter summary_csv(join(out, "waveguide_summary.csv"),
                        {"order", "resolution", "h", "dt", "steps", "space_time_error",
                         "peak_energy", "final_energy"});
  CsvWriter eoc_csv(join(out, "waveguide_eoc.csv"), {"order", "fine_resolution", "rate"});

  // Reference profile dump for offline comparison.
  {
    CsvWriter ref_csv(join(out, "reference_profile.csv"), {"time", "x", "u"});
    const double kappa = 2.0 * std::acos(-1.0);
    for (int k = 0; k <= 4; ++k) {
      double t = 0.25 * static_cast<double>(k) * base.horizon;
      for (int i = 0; i <= 100; ++i) {
        double x = 0.02 * static_cast<double>(i);
        ref_csv.row({CsvWriter::cell(t), CsvWriter::cell(x),
                     CsvWriter::cell(waveguide_exact(t, x, kappa))});
      }
    }
  }

  Extras extras;
  PrimalMesh last_mesh;
  for (int order : orders) {
    std::vector<double> st_errors, widths;
    for (int res : resolutions) {
      WaveguideOptions opt = base;
      opt.order = order;
      opt.cells_per_half = res;
      SnapshotHook hook;
      if (vtk && order == orders.back() && res == resolutions.back())
        hook = [&](int k, double, const Discretization& disc, const VectorX& e,
                   const VectorX&) {
          if (k % vtk_stride != 0) return;
          write_vtk_field(join(out, "waveguide_e_" + std::to_string(k) + ".vtk"),
                          disc.electric, disc.dual, e, "E");
        };
      WaveguideResult r = run_waveguide(opt, hook);
      for (std::size_t k = 0; k < r.times.size(); ++k)
        errors_csv.row({CsvWriter::cell(static_cast<index_t>(order)),
                        CsvWriter::cell(static_cast<index_t>(res)), CsvWriter::cell(r.h),
                        CsvWriter::cell(r.times[k]),
                        CsvWriter::cell(k < r.errors.size() ? r.errors[k] : 0.0),
                        CsvWriter::cell(r.energy[k])});
      summary_csv.row({CsvWriter::cell(static_cast<index_t>(order)),
                       CsvWriter::cell(static_cast<index_t>(res)), CsvWriter::cell(r.h),
                       CsvWriter::cell(r.dt), CsvWriter::cell(r.steps),
                       CsvWriter::cell(r.space_time_error), CsvWriter::cell(r.peak_energy),
                       CsvWriter::cell(r.final_energy)});
      st_errors.push_back(r.space_time_error);
      widths.push_back(r.h);
    }
    for (std::size_t i = 1; i < st_errors.size(); ++i) {
      double rate =
          std::log(st_errors[i - 1] / st_errors[i]) / std::log(widths[i - 1] / widths[i]);
      eoc_csv.row({CsvWriter::cell(static_cast<index_t>(order)),
                   CsvWriter::cell(static_cast<index_t>(resolutions[i])),
                   CsvWriter::cell(rate)});
    }
  }
  last_mesh = waveguide_mesh(resolutions.back());
  write_manifest(join(out, "manifest.txt"), config, last_mesh, extras);
}

void sphere_experiment(const Config& config, const std::string& out, std::uint64_t seed) {
  WaveguideOptions opt;
  opt.order = static_cast<int>(config.integer_or("study", "order", 2));
  opt.cells_per_half = static_cast<int>(config.integer_or("study", "resolution", 2));
  opt.horizon = config.number_or("time", "horizon", 6.0);
  opt.snapshots = static_cast<int>(config.integer_or("time", "snapshots", 49));
  opt.cfl_safety = config.number_or("time", "cfl_safety", 0.9);
  opt.sigma = config.number_or("pml", "sigma", 5.0);
  opt.seed = seed;
  opt.with_sphere = true;
  opt.sphere_radius = config.number_or("material", "sphere_radius", 0.15);
  opt.sphere_eps = config.number_or("material", "sphere_eps", 9.0);
  bool vtk = config.flag_or("output", "vtk", true);
  int vtk_stride = static_cast<int>(config.integer_or("output", "vtk_stride", 4));

  CsvWriter energy_csv(join(out, "sphere_energy.csv"), {"time", "interior_energy"});
  bool dumped_mesh = false;
  SnapshotHook hook = [&](int k, double, const Discretization& disc, const VectorX& e,
                          const VectorX&) {
    if (!dumped_mesh) {
      write_vtk_subcells(join(out, "sphere_subcells.vtk"), disc.mesh, disc.dual);
      dumped_mesh = true;
    }
    if (vtk && k % vtk_stride == 0)
      write_vtk_field(join(out, "sphere_e_" + std::to_string(k) + ".vtk"), disc.electric,
                      disc.dual, e, "E");
  };
  WaveguideResult r = run_waveguide(opt, hook);
  for (std::size_t k = 0; k < r.times.size(); ++k)
    energy_csv.row({CsvWriter::cell(r.times[k]), CsvWriter::cell(r.energy[k])});

  Extras extras;
  extras.emplace_back("dt", format_number(r.dt));
  extras.emplace_back("steps", std::to_string(r.steps));
  extras.emplace_back("peak_energy", format_number(r.peak_energy));
  extras.emplace_back("final_energy", format_number(r.final_energy));
  write_manifest(join(out, "manifest.txt"), config,
                 waveguide_mesh(opt.cells_per_half, true, opt.sphere_radius), extras);
}

}  // namespace

void run_experiment(const std::string& kind, const Config& config, const std::string& out_dir,
                    std::uint64_t seed) {
  fs::create_directories(out_dir);
  if (kind == "sparsity")
    sparsity_experiment(config, out_dir, seed);
  else if (kind == "eigen")
    eigen_experiment(config, out_dir, seed);
  else if (kind == "cfl")
    cfl_experiment(config, out_dir, seed);
  else if (kind == "waveguide")
    waveguide_experiment(config, out_dir, seed);
  else if (kind == "sphere")
    sphere_experiment(config, out_dir, seed);
  else
    throw Error("unknown experiment kind: " + kind +
                " (expected sparsity | eigen | cfl | waveguide | sphere)");
}

}  // namespace dcm
