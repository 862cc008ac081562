#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <vector>

#include "dcm/experiments.hpp"
#include "dcm/parallel.hpp"
#include "dcm/report.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dcm;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("dcm_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_SUITE("config_report") {

TEST_CASE("config parsing handles sections, comments and typed access") {
  Config cfg = Config::parse_text(
      "top = 3            # key before any section header\n"
      "[mesh]\n"
      "refine = 2\n"
      "file = box.msh     # trailing comment\n"
      "\n"
      "[study]\n"
      "orders = 1 2 3\n"
      "safety = 0.9\n"
      "vtk = on\n"
      "weights = 0.5 1.5\n");
  CHECK(cfg.get("", "top") == "3");
  CHECK(cfg.has("mesh", "refine"));
  CHECK(!cfg.has("mesh", "missing"));
  CHECK(cfg.integer("mesh", "refine") == 2);
  CHECK(cfg.get("mesh", "file") == "box.msh");
  CHECK(cfg.number("study", "safety") == 0.9);
  CHECK(cfg.number_or("study", "absent", 7.5) == 7.5);
  CHECK(cfg.integer_or("study", "absent", 4) == 4);
  CHECK(cfg.get_or("study", "absent", "d") == "d");
  CHECK(cfg.flag_or("study", "vtk", false));
  CHECK(cfg.flag_or("study", "absent", true));
  CHECK(cfg.integers_or("study", "orders", {}) == std::vector<int>{1, 2, 3});
  CHECK(cfg.numbers_or("study", "weights", {}) == std::vector<double>{0.5, 1.5});

  CHECK_THROWS_AS(cfg.get("study", "absent"), Error);
  CHECK_THROWS_AS(cfg.number("mesh", "file"), Error);
  CHECK_THROWS_AS(cfg.integer("study", "safety"), Error);
  CHECK_THROWS_AS(cfg.flag_or("mesh", "file", false), Error);
  CHECK_THROWS_AS(Config::parse_text("[mesh]\nrefine = 1\nrefine = 2\n"), Error);
  CHECK_THROWS_AS(Config::parse_text("[mesh\n"), Error);
  CHECK_THROWS_AS(Config::parse_text("justakey\n"), Error);
  CHECK_THROWS_AS(Config::parse_file("/nonexistent/path.cfg"), Error);
}

TEST_CASE("the canonical echo is a fixed point of the parser") {
  Config cfg = Config::parse_text("[b]\nz = 1\na = 2\n[a]\nk = v\n");
  std::string once = cfg.echo();
  CHECK(Config::parse_text(once).echo() == once);
  CHECK(once == "[a]\nk = v\n[b]\na = 2\nz = 1\n");
}

TEST_CASE("formatted numbers parse back to the identical double") {
  for (double v : {1.0 / 3.0, 0.1, -std::acos(-1.0), 1e-300, 6.02214076e23, 0.0,
                   5760.0, 1.0 + 1e-15}) {
    std::string text = format_number(v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
  }
}

TEST_CASE("csv rows restate their cells verbatim") {
  TempDir tmp("csv");
  {
    CsvWriter csv(tmp.file("t.csv"), {"a", "b"});
    csv.row({"1", "x"});
    csv.row({CsvWriter::cell(0.5), CsvWriter::cell(static_cast<index_t>(9))});
    CHECK_THROWS_AS(csv.row({"only-one"}), Error);
  }
  CHECK(slurp(tmp.file("t.csv")) == "a,b\n1,x\n0.5,9\n");
}

TEST_CASE("the manifest records version, mesh hash and extras") {
  TempDir tmp("manifest");
  PrimalMesh mesh = two_tets();
  Config cfg = Config::parse_text("[mesh]\nrefine = 1\n");
  write_manifest(tmp.file("manifest.txt"), cfg, mesh, {{"seed", "42"}});
  std::string text = slurp(tmp.file("manifest.txt"));
  CHECK(text.find("library_version = 1.0.0") != std::string::npos);
  CHECK(text.find("mesh_vertices = 5") != std::string::npos);
  CHECK(text.find("mesh_tets = 2") != std::string::npos);
  CHECK(text.find("seed = 42") != std::string::npos);
  CHECK(text.find("refine = 1") != std::string::npos);
  char expected[32];
  std::snprintf(expected, sizeof expected, "mesh_hash = %016llx",
                static_cast<unsigned long long>(mesh_hash(mesh)));
  CHECK(text.find(expected) != std::string::npos);
}

TEST_CASE("matrix market export parses back to the same matrix") {
  TempDir tmp("mtx");
  Discretization disc = discretize(single_tet(), 1);
  CsrMatrix curl = assemble_curl(disc.magnetic, disc.electric);
  write_matrix_market(tmp.file("curl.mtx"), curl);

  std::ifstream in(tmp.file("curl.mtx"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  index_t rows, cols, nnz;
  in >> rows >> cols >> nnz;
  REQUIRE(rows == curl.rows);
  REQUIRE(cols == curl.cols);
  REQUIRE(nnz == curl.nnz());
  MatrixX read_back = MatrixX::Zero(rows, cols);
  for (index_t k = 0; k < nnz; ++k) {
    index_t r, c;
    double v;
    REQUIRE((in >> r >> c >> v));
    read_back(r - 1, c - 1) += v;
  }
  CHECK((read_back - dense(curl)).norm() == 0.0);
}

TEST_CASE("vtk exports carry the expected structure") {
  TempDir tmp("vtk");
  Discretization disc = discretize(two_tets(), 1);
  write_vtk_subcells(tmp.file("cells.vtk"), disc.mesh, disc.dual);
  std::string cells = slurp(tmp.file("cells.vtk"));
  CHECK(cells.rfind("# vtk DataFile Version", 0) == 0);
  CHECK(cells.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(cells.find("CELL_DATA 8") != std::string::npos);  // 4 subcells per tet

  VectorX coeffs = random_vector(disc.electric.size(), 5);
  write_vtk_field(tmp.file("field.vtk"), disc.electric, disc.dual, coeffs, "efield");
  std::string field = slurp(tmp.file("field.vtk"));
  CHECK(field.find("POINTS 64 double") != std::string::npos);  // 8 corners per subcell
  CHECK(field.find("VECTORS efield double") != std::string::npos);
}

TEST_CASE("dof table and histogram smoke") {
  TempDir tmp("tables");
  Discretization disc = discretize(single_tet(), 1);
  write_dof_table(tmp.file("dofs.csv"), disc.electric);
  std::string table = slurp(tmp.file("dofs.csv"));
  CHECK(table.find("dof") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') ==
        static_cast<long>(disc.electric.size()) + 1);

  BlockDiagMatrix mass = assemble_lumped_mass(disc.electric, disc.dual, constant_material(1.0));
  write_nnz_histogram(tmp.file("hist.csv"), mass);
  std::ifstream in(tmp.file("hist.csv"));
  std::string header;
  std::getline(in, header);
  index_t per_row, count, total = 0;
  char comma;
  while (in >> per_row >> comma >> count) total += count;
  CHECK(total == mass.dim);
}

TEST_CASE("mesh quality is positive and dips under perturbation") {
  Discretization regular = discretize(unit_cube_mesh(1), 1);
  double q = mesh_quality(regular.dual);
  CHECK(q > 0.01);
  CHECK(q <= 1.5);
  Discretization bent = discretize(perturb_vertices(unit_cube_mesh(1), 0.25, 33), 1);
  double qb = mesh_quality(bent.dual);
  CHECK(qb > 0.0);
  CHECK(qb < q);
}

TEST_CASE("parallel chunking is independent of the worker count") {
  const int saved = thread_count();
  std::vector<std::pair<std::size_t, std::size_t>> chunks_serial, chunks_threaded;
  std::mutex guard;
  auto collect = [&](std::vector<std::pair<std::size_t, std::size_t>>& into) {
    return [&](std::size_t b, std::size_t e) {
      std::scoped_lock lock(guard);
      into.emplace_back(b, e);
    };
  };
  set_thread_count(1);
  parallel_for(10000, collect(chunks_serial), 512);
  set_thread_count(3);
  parallel_for(10000, collect(chunks_threaded), 512);
  set_thread_count(saved);

  std::sort(chunks_serial.begin(), chunks_serial.end());
  std::sort(chunks_threaded.begin(), chunks_threaded.end());
  CHECK(chunks_serial == chunks_threaded);
  // The chunks tile [0, n) without gaps or overlap.
  std::size_t cursor = 0;
  for (auto [b, e] : chunks_serial) {
    CHECK(b == cursor);
    CHECK(e > b);
    cursor = e;
  }
  CHECK(cursor == 10000);
}

TEST_CASE("experiments rerun byte-identically") {
  TempDir a("exp_a"), b("exp_b");
  Config cfg = Config::parse_text("[study]\norders = 1 2\n[mesh]\nrefine = 0\n");
  run_experiment("sparsity", cfg, a.path.string(), 42);
  run_experiment("sparsity", cfg, b.path.string(), 42);

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(a.path))
    names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  REQUIRE(!names.empty());
  for (const std::string& name : names) {
    REQUIRE(fs::exists(b.path / name));
    CHECK(slurp((a.path / name).string()) == slurp((b.path / name).string()));
  }
  CHECK_THROWS_AS(run_experiment("nonsense", cfg, a.path.string(), 42), Error);
}

}  // TEST_SUITE
