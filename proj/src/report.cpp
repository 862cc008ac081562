#include "dcm/report.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>

#include "dcm/fespace.hpp"

namespace dcm {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()) {
  require(out_.good(), "cannot open output file: " + path);
  require(!columns.empty(), "CSV needs at least one column");
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  require(cells.size() == columns_, "CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
  require(out_.good(), "CSV write failed");
}

void write_manifest(const std::string& path, const Config& config, const PrimalMesh& mesh,
                    const std::vector<std::pair<std::string, std::string>>& extras) {
  std::ofstream out(path);
  require(out.good(), "cannot open output file: " + path);
  out << "library_version = " << version() << '\n';
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(mesh_hash(mesh)));
  out << "mesh_hash = " << hash << '\n';
  out << "mesh_vertices = " << mesh.vertex_count() << '\n';
  out << "mesh_tets = " << mesh.tet_count() << '\n';
  for (const auto& [key, value] : extras) out << key << " = " << value << '\n';
  out << "\n# configuration\n" << config.echo();
  require(out.good(), "manifest write failed");
}

void write_matrix_market(const std::string& path, const CsrMatrix& matrix) {
  std::ofstream out(path);
  require(out.good(), "cannot open output file: " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows << ' ' << matrix.cols << ' ' << matrix.nnz() << '\n';
  for (index_t r = 0; r < matrix.rows; ++r)
    for (index_t k = matrix.row_ptr[r]; k < matrix.row_ptr[r + 1]; ++k)
      out << r + 1 << ' ' << matrix.col_idx[k] + 1 << ' ' << format_number(matrix.values[k])
          << '\n';
  require(out.good(), "matrix export failed");
}

void write_nnz_histogram(const std::string& path, const BlockDiagMatrix& matrix) {
  std::map<index_t, index_t> histogram;
  for (std::size_t b = 0; b < matrix.blocks.size(); ++b) {
    const MatrixX& block = matrix.blocks[b];
    for (index_t r = 0; r < block.rows(); ++r) {
      index_t nnz = 0;
      for (index_t c = 0; c < block.cols(); ++c)
        if (block(r, c) != 0.0) ++nnz;
      ++histogram[nnz];
    }
  }
  CsvWriter csv(path, {"nnz_per_row", "row_count"});
  for (const auto& [nnz, count] : histogram) csv.row({CsvWriter::cell(nnz), CsvWriter::cell(count)});
}

namespace {

// VTK_HEXAHEDRON wants the bottom quad counter-clockwise then the top; our
// corner index uses bit d for axis d, hence the 2<->3 and 6<->7 swaps.
constexpr int kVtkHexOrder[8] = {0, 1, 3, 2, 4, 5, 7, 6};

void write_vtk_header(std::ofstream& out, const std::string& title) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
}

void write_hex_cells(std::ofstream& out, index_t count) {
  out << "CELLS " << count << ' ' << 9 * count << '\n';
  for (index_t k = 0; k < count; ++k) {
    out << 8;
    for (int c = 0; c < 8; ++c) out << ' ' << 8 * k + kVtkHexOrder[c];
    out << '\n';
  }
  out << "CELL_TYPES " << count << '\n';
  for (index_t k = 0; k < count; ++k) out << "12\n";
}

}  // namespace

void write_vtk_subcells(const std::string& path, const PrimalMesh& mesh,
                        const DualComplex& dual) {
  std::ofstream out(path);
  require(out.good(), "cannot open output file: " + path);
  write_vtk_header(out, "dual subcell complex");
  const index_t n = dual.subcell_count();
  out << "POINTS " << 8 * n << " double\n";
  for (const Subcell& sc : dual.subcells)
    for (const Vec3& corner : sc.corners)
      out << format_number(corner[0]) << ' ' << format_number(corner[1]) << ' '
          << format_number(corner[2]) << '\n';
  write_hex_cells(out, n);
  out << "CELL_DATA " << n << "\nSCALARS tet int 1\nLOOKUP_TABLE default\n";
  for (const Subcell& sc : dual.subcells) out << sc.tet << '\n';
  out << "SCALARS region int 1\nLOOKUP_TABLE default\n";
  for (const Subcell& sc : dual.subcells) out << mesh.regions[sc.tet] << '\n';
  require(out.good(), "VTK write failed");
}

void write_vtk_field(const std::string& path, const DofSpace& space, const DualComplex& dual,
                     const VectorX& coeffs, const std::string& field_name) {
  require(coeffs.size() == space.size(), "coefficient vector does not match the space");
  std::ofstream out(path);
  require(out.good(), "cannot open output file: " + path);
  write_vtk_header(out, "field snapshot");
  const index_t n = dual.subcell_count();
  out << "POINTS " << 8 * n << " double\n";
  for (const Subcell& sc : dual.subcells)
    for (const Vec3& corner : sc.corners)
      out << format_number(corner[0]) << ' ' << format_number(corner[1]) << ' '
          << format_number(corner[2]) << '\n';
  write_hex_cells(out, n);

  const int n1 = space.nodes_per_axis();
  const int n3 = n1 * n1 * n1;
  out << "POINT_DATA " << 8 * n << "\nVECTORS " << field_name << " double\n";
  for (index_t k = 0; k < n; ++k) {
    const Subcell& sc = dual.subcells[k];
    for (int c = 0; c < 8; ++c) {
      Vec3 xhat(c & 1 ? 1.0 : -1.0, c & 2 ? 1.0 : -1.0, c & 4 ? 1.0 : -1.0);
      Vec3 vhat = Vec3::Zero();
      for (int axis = 0; axis < 3; ++axis)
        for (int alpha = 0; alpha < n3; ++alpha) {
          double coeff = coeffs[space.slot_dof(k, axis, alpha)];
          if (coeff != 0.0) vhat[axis] += coeff * space.shape_value(alpha, xhat);
        }
      Vec3 v = piola_covariant(subcell_jacobian(sc, xhat), vhat);
      out << format_number(v[0]) << ' ' << format_number(v[1]) << ' ' << format_number(v[2])
          << '\n';
    }
  }
  require(out.good(), "VTK write failed");
}

void write_dof_table(const std::string& path, const DofSpace& space) {
  CsvWriter csv(path, {"dof", "family", "owner", "entity_a", "entity_b", "class", "slots"});
  for (index_t i = 0; i < space.size(); ++i) {
    const DofInfo& d = space.dofs[i];
    const char* family = d.family == DofFamily::Cell   ? "cell"
                         : d.family == DofFamily::Face ? "face"
                                                       : "edge";
    csv.row({CsvWriter::cell(i), family, CsvWriter::cell(d.owner), CsvWriter::cell(d.entity_a),
             CsvWriter::cell(d.entity_b), CsvWriter::cell(d.lumped_class),
             CsvWriter::cell(static_cast<index_t>(d.slots.size()))});
  }
}

double mesh_quality(const DualComplex& dual) {
  double worst = std::numeric_limits<double>::infinity();
  for (const Subcell& sc : dual.subcells) {
    Vec3 lo = sc.corners[0], hi = sc.corners[0];
    for (const Vec3& c : sc.corners) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
    double box = (hi - lo).prod();
    double min_det = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          Vec3 xhat(i - 1.0, j - 1.0, k - 1.0);
          min_det = std::min(min_det, subcell_jacobian(sc, xhat).determinant());
        }
    worst = std::min(worst, 8.0 * min_det / box);
  }
  return worst;
}

}  // namespace dcm
