#include "dcm/polybasis.hpp"

#include <cmath>
#include <vector>

namespace dcm {

namespace {

// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

QuadratureRule1D gauss_legendre(int npoints) {
  require(npoints >= 1, "gauss_legendre: need at least one point");
  QuadratureRule1D rule;
  rule.nodes.resize(npoints);
  rule.weights.resize(npoints);
  for (int i = 0; i < npoints; ++i) {
    // Chebyshev initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (npoints + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre(npoints, x, p, dp);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre(npoints, x, p, dp);
    rule.nodes[npoints - 1 - i] = x;
    rule.weights[npoints - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureRule1D gauss_radau(int order) {
  require(order >= 1, "gauss_radau: order must be >= 1");
  const int n = order + 1;  // point count
  QuadratureRule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.nodes[0] = -1.0;
  rule.weights[0] = 2.0 / (n * n);

  // Interior nodes are the roots of (P_{n-1}(x) + P_n(x)) / (1 + x). Bracket by a
  // sign scan on a Chebyshev grid, then polish with Newton on the deflated function.
  auto deflated = [&](double x, double& h, double& dh) {
    double pa, dpa, pb, dpb;
    legendre(n - 1, x, pa, dpa);
    legendre(n, x, pb, dpb);
    double g = pa + pb, dg = dpa + dpb;
    h = g / (1.0 + x);
    dh = (dg * (1.0 + x) - g) / ((1.0 + x) * (1.0 + x));
  };

  const int scan = 8 * n;
  std::vector<double> roots;
  double xprev = -1.0 + 1e-9, hprev, dh;
  deflated(xprev, hprev, dh);
  for (int s = 1; s <= scan; ++s) {
    double x = -std::cos(M_PI * s / scan);
    if (x <= xprev) continue;
    double h;
    deflated(x, h, dh);
    if (hprev * h < 0.0) {
      double lo = xprev, hi = x;
      double mid = 0.5 * (lo + hi);
      for (int it = 0; it < 60; ++it) {
        double hm, dm;
        deflated(mid, hm, dm);
        if (hprev * hm <= 0.0)
          hi = mid;
        else
          lo = mid;
        mid = 0.5 * (lo + hi);
      }
      for (int it = 0; it < 50; ++it) {
        double hm, dm;
        deflated(mid, hm, dm);
        double dx = hm / dm;
        mid -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      roots.push_back(mid);
    }
    xprev = x;
    hprev = h;
  }
  require(static_cast<int>(roots.size()) == n - 1,
          "gauss_radau: root scan found wrong interior node count");
  for (int i = 0; i < n - 1; ++i) {
    double x = roots[i];
    double p, dp;
    legendre(n - 1, x, p, dp);
    rule.nodes[i + 1] = x;
    rule.weights[i + 1] = (1.0 - x) / (n * n * p * p);
  }
  return rule;
}

LagrangeBasis1D::LagrangeBasis1D(VectorX nodes) : nodes_(std::move(nodes)) {
  const int n = size();
  require(n >= 1, "LagrangeBasis1D: empty node set");
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      require(nodes_[a] != nodes_[b], "LagrangeBasis1D: duplicate nodes");
  bary_.resize(n);
  for (int a = 0; a < n; ++a) {
    double w = 1.0;
    for (int b = 0; b < n; ++b)
      if (b != a) w *= nodes_[a] - nodes_[b];
    bary_[a] = 1.0 / w;
  }
  diff_.resize(n, n);
  for (int c = 0; c < n; ++c) {
    double rowsum = 0.0;
    for (int a = 0; a < n; ++a) {
      if (a == c) continue;
      diff_(c, a) = bary_[a] / bary_[c] / (nodes_[c] - nodes_[a]);
      rowsum += diff_(c, a);
    }
    diff_(c, c) = -rowsum;
  }
}

double LagrangeBasis1D::evaluate(int a, double x) const {
  const int n = size();
  for (int b = 0; b < n; ++b)
    if (x == nodes_[b]) return a == b ? 1.0 : 0.0;
  double omega = 1.0;
  for (int b = 0; b < n; ++b) omega *= x - nodes_[b];
  return bary_[a] * omega / (x - nodes_[a]);
}

double LagrangeBasis1D::derivative(int a, double x) const {
  const int n = size();
  for (int c = 0; c < n; ++c)
    if (x == nodes_[c]) return diff_(c, a);
  // l_a(x) = bary_a * omega(x)/(x - x_a);  l_a' = bary_a * (omega'*(x-x_a) - omega)/(x-x_a)^2
  double omega = 1.0;
  for (int b = 0; b < n; ++b) omega *= x - nodes_[b];
  double domega = 0.0;
  for (int b = 0; b < n; ++b) {
    double term = 1.0;
    for (int c = 0; c < n; ++c)
      if (c != b) term *= x - nodes_[c];
    domega += term;
  }
  double d = x - nodes_[a];
  return bary_[a] * (domega * d - omega) / (d * d);
}

void LagrangeBasis1D::evaluate_all(double x, VectorX& out) const {
  const int n = size();
  out.resize(n);
  for (int c = 0; c < n; ++c) {
    if (x == nodes_[c]) {
      out.setZero();
      out[c] = 1.0;
      return;
    }
  }
  double omega = 1.0;
  for (int b = 0; b < n; ++b) omega *= x - nodes_[b];
  for (int a = 0; a < n; ++a) out[a] = bary_[a] * omega / (x - nodes_[a]);
}

void LagrangeBasis1D::derivative_all(double x, VectorX& out) const {
  const int n = size();
  out.resize(n);
  for (int a = 0; a < n; ++a) out[a] = derivative(a, x);
}

}  // namespace dcm
