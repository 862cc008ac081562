#pragma once

#include <array>

#include "dcm/core.hpp"

namespace dcm {

struct QuadratureRule1D {
  VectorX nodes;
  VectorX weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Left Gauss-Radau rule on [-1,1] for polynomial order P: P+1 nodes with the first
/// pinned at -1, exact for degree <= 2P. Weights are positive and sum to 2.
QuadratureRule1D gauss_radau(int order);

/// Gauss-Legendre rule on [-1,1] with n points, exact for degree <= 2n-1.
QuadratureRule1D gauss_legendre(int npoints);

/// Lagrange interpolation basis on a fixed 1D node set, evaluated in barycentric
/// form. Evaluation at a stored node returns the exact Kronecker delta.
class LagrangeBasis1D {
 public:
  explicit LagrangeBasis1D(VectorX nodes);

  int size() const { return static_cast<int>(nodes_.size()); }
  double node(int a) const { return nodes_[a]; }
  const VectorX& nodes() const { return nodes_; }

  double evaluate(int a, double x) const;
  double derivative(int a, double x) const;
  void evaluate_all(double x, VectorX& out) const;
  void derivative_all(double x, VectorX& out) const;

  /// diff(c, a) = l_a'(node_c)
  const MatrixX& diff_matrix() const { return diff_; }

 private:
  VectorX nodes_;
  VectorX bary_;  // barycentric weights 1/prod(node_a - node_b)
  MatrixX diff_;
};

/// Linearization of tensor multi-indices alpha in {0..n-1}^3; axis 0 varies fastest.
inline int tensor_linear(int n, int a0, int a1, int a2) { return a0 + n * (a1 + n * a2); }

inline std::array<int, 3> tensor_unpack(int n, int lin) {
  return {lin % n, (lin / n) % n, lin / (n * n)};
}

}  // namespace dcm
