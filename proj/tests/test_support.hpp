#pragma once

// Small helpers shared by the unit suites: canned meshes and dense conversions
// for oracle comparisons.

#include <array>
#include <random>
#include <vector>

#include "dcm/assembly.hpp"
#include "dcm/mesh.hpp"

namespace testsupport {

inline dcm::PrimalMesh single_tet() {
  dcm::PrimalMesh m;
  m.vertices = {dcm::Vec3(0, 0, 0), dcm::Vec3(1, 0, 0), dcm::Vec3(0, 1, 0),
                dcm::Vec3(0, 0, 1)};
  m.tets = {{0, 1, 2, 3}};
  m.regions = {0};
  dcm::canonicalize(m);
  return m;
}

// Two tets sharing the face {1,2,3}: 5 vertices, 9 edges, 7 faces.
inline dcm::PrimalMesh two_tets() {
  dcm::PrimalMesh m;
  m.vertices = {dcm::Vec3(0, 0, 0), dcm::Vec3(1, 0, 0), dcm::Vec3(0, 1, 0),
                dcm::Vec3(0, 0, 1), dcm::Vec3(1, 1, 1)};
  m.tets = {{0, 1, 2, 3}, {1, 2, 3, 4}};
  m.regions = {0, 0};
  dcm::canonicalize(m);
  return m;
}

inline dcm::PrimalMesh scaled(dcm::PrimalMesh m, double s) {
  for (auto& v : m.vertices) v *= s;
  return m;
}

inline dcm::MatrixX dense(const dcm::CsrMatrix& m) {
  dcm::MatrixX out = dcm::MatrixX::Zero(m.rows, m.cols);
  for (dcm::index_t r = 0; r < m.rows; ++r)
    for (dcm::index_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
      out(r, m.col_idx[k]) += m.values[k];
  return out;
}

inline dcm::MatrixX dense(const dcm::BlockDiagMatrix& m) {
  dcm::MatrixX out = dcm::MatrixX::Zero(m.dim, m.dim);
  for (std::size_t b = 0; b < m.blocks.size(); ++b) {
    const auto& r = m.ranges[b];
    out.block(r[0], 0, r[1] - r[0], m.dim).middleCols(r[0], r[1] - r[0]) = m.blocks[b];
  }
  return out;
}

inline dcm::VectorX random_vector(dcm::index_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  dcm::VectorX v(n);
  for (dcm::index_t i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace testsupport
