#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "dcm/assembly.hpp"
#include "dcm/config.hpp"

namespace dcm {

/// Exact decimal form (%.17g): parsing it back recovers the same double, so CSV
/// outputs are bit-reproducible across runs.
std::string format_number(double value);

/// Minimal CSV emitter; all numbers go through format_number.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  static std::string cell(double value) { return format_number(value); }
  static std::string cell(index_t value) { return std::to_string(value); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// Plain-text run manifest: config echo, library version, mesh hash, extras.
void write_manifest(const std::string& path, const Config& config,
                    const PrimalMesh& mesh,
                    const std::vector<std::pair<std::string, std::string>>& extras);

/// MatrixMarket coordinate export (1-based, general) for external verification.
void write_matrix_market(const std::string& path, const CsrMatrix& matrix);

/// nnz-per-row histogram (row_count rows carrying nnz_per_row entries each).
void write_nnz_histogram(const std::string& path, const BlockDiagMatrix& matrix);

/// Legacy-VTK ASCII dump of the subcell complex as hexahedra, with the owning
/// tet and region as cell data.
void write_vtk_subcells(const std::string& path, const PrimalMesh& mesh,
                        const DualComplex& dual);

/// Field snapshot: subcells as hexahedra, the discrete field evaluated at the
/// eight corners as point vectors (corner points are per-subcell, not merged).
void write_vtk_field(const std::string& path, const DofSpace& space, const DualComplex& dual,
                     const VectorX& coeffs, const std::string& field_name);

/// Debug dump of the DOF tables.
void write_dof_table(const std::string& path, const DofSpace& space);

/// Minimum over all subcells of det J (sampled on a 3³ grid) scaled by 8 and
/// divided by the subcell's corner bounding-box volume; 0..1-ish, higher is better.
double mesh_quality(const DualComplex& dual);

}  // namespace dcm
