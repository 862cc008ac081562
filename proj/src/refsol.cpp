#include "dcm/refsol.hpp"

#include <algorithm>
#include <cmath>

#include "dcm/polybasis.hpp"

namespace dcm {

std::vector<double> cavity_eigenvalues(const Vec3& box, double max_value) {
  require(box.minCoeff() > 0.0, "box lengths must be positive");
  require(max_value > 0.0, "max_value must be positive");
  const double pi = std::acos(-1.0);
  Vec3 k(pi / box[0], pi / box[1], pi / box[2]);
  auto bound = [&](int axis) { return static_cast<int>(std::sqrt(max_value) / k[axis]) + 1; };

  std::vector<double> values;
  for (int m = 0; m <= bound(0); ++m)
    for (int n = 0; n <= bound(1); ++n)
      for (int p = 0; p <= bound(2); ++p) {
        double lambda = m * m * k[0] * k[0] + n * n * k[1] * k[1] + p * p * k[2] * k[2];
        if (lambda > max_value) break;
        if (m >= 1 && n >= 1) values.push_back(lambda);            // TM
        if (p >= 1 && (m >= 1 || n >= 1)) values.push_back(lambda);  // TE
      }
  std::sort(values.begin(), values.end());
  return values;
}

std::function<Vec3(const Vec3&)> cavity_tm_field(const Vec3& box, int m, int n) {
  require(m >= 1 && n >= 1, "TM(m,n,0) needs m,n >= 1");
  const double pi = std::acos(-1.0);
  const double kx = m * pi / box[0];
  const double ky = n * pi / box[1];
  return [kx, ky](const Vec3& x) {
    return Vec3(0.0, 0.0, std::sin(kx * x[0]) * std::sin(ky * x[1]));
  };
}

namespace {

// Power series of J1(x)/x in long double; converges for the whole series range
// |x| <= 16 with worst-case cancellation well under 1e-15.
long double j1_over_x_series(long double x) {
  const long double q = -0.25L * x * x;
  long double term = 0.5L;
  long double sum = term;
  for (int k = 1; k <= 64; ++k) {
    term *= q / (static_cast<long double>(k) * (k + 1));
    sum += term;
    if (std::abs(term) < 1e-25L * std::abs(sum) + 1e-30L) return sum;
  }
  return sum;
}

// Hankel asymptotic expansion for |x| > 16, truncated at the smallest term.
long double j1_asymptotic(long double x) {
  const long double mu = 4.0L;  // 4 nu^2 for nu = 1
  long double p = 1.0L, q = 0.0L;
  long double term = 1.0L;
  long double prev = std::abs(term);
  for (int k = 1; k <= 40; ++k) {
    long double odd = 2.0L * k - 1.0L;
    term *= (mu - odd * odd) / (8.0L * x * k);
    if (std::abs(term) >= prev) break;  // past the optimal truncation point
    prev = std::abs(term);
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
  }
  const long double pi = 3.14159265358979323846264338327950288L;
  long double chi = x - 0.75L * pi;
  return std::sqrt(2.0L / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j1(double x) {
  long double ax = std::abs(static_cast<long double>(x));
  long double value =
      ax <= 16.0L ? ax * j1_over_x_series(ax) : j1_asymptotic(ax);
  return static_cast<double>(x < 0 ? -value : value);  // J1 is odd
}

double bessel_j1_over_x(double x) {
  long double ax = std::abs(static_cast<long double>(x));
  if (ax <= 16.0L) return static_cast<double>(j1_over_x_series(ax));
  return static_cast<double>(j1_asymptotic(ax) / ax);
}

double inflow_pulse(double t) {
  if (t <= 0.0) return 0.0;
  double d = 1.0 - t;
  return std::exp(-5.0 * d * d) * std::sin(10.0 * t);
}

namespace {

const QuadratureRule1D& panel_rule() {
  static const QuadratureRule1D rule = gauss_legendre(16);
  return rule;
}

template <class F>
double panel(const F& f, double a, double b) {
  const QuadratureRule1D& rule = panel_rule();
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int g = 0; g < rule.size(); ++g) sum += rule.weights[g] * f(mid + half * rule.nodes[g]);
  return half * sum;
}

template <class F>
double adaptive(const F& f, double a, double b, double tol, double whole, int depth) {
  double mid = 0.5 * (a + b);
  double left = panel(f, a, mid);
  double right = panel(f, mid, b);
  double delta = left + right - whole;
  if (std::abs(delta) <= tol) return left + right;
  require(depth > 0, "adaptive quadrature failed to reach the requested tolerance");
  return adaptive(f, a, mid, 0.5 * tol, left, depth - 1) +
         adaptive(f, mid, b, 0.5 * tol, right, depth - 1);
}

}  // namespace

double waveguide_exact(double t, double x, double kappa, double tol) {
  require(x >= 0.0, "waveguide profile is defined for x >= 0");
  require(kappa > 0.0 && tol > 0.0, "kappa and tol must be positive");
  if (t <= x) return 0.0;  // ahead of the wave front
  auto integrand = [&](double tau) {
    double s2 = tau * tau - x * x;
    double s = s2 > 0.0 ? std::sqrt(s2) : 0.0;
    return inflow_pulse(t - tau) * bessel_j1_over_x(kappa * s);
  };
  double dispersive = x == 0.0 ? 0.0 : adaptive(integrand, x, t, tol, panel(integrand, x, t), 48);
  return inflow_pulse(t - x) - kappa * kappa * x * dispersive;
}

WaveguideSnapshot::WaveguideSnapshot(double t, double kappa, double x_max, index_t samples,
                                     double tol)
    : t_(t), kappa_(kappa), x_max_(x_max), tol_(tol) {
  require(samples >= 8, "snapshot needs at least 8 samples");
  require(x_max > 0.0, "x_max must be positive");
  dx_ = x_max / static_cast<double>(samples - 1);
  values_.resize(samples);
  for (index_t i = 0; i < samples; ++i)
    values_[i] = waveguide_exact(t_, static_cast<double>(i) * dx_, kappa_, tol_);
}

double WaveguideSnapshot::eval(double x) const {
  if (x < 0.0 || x >= t_) return 0.0;
  // The profile has limited smoothness at the front; quadrature is exact there
  // and cheap because the integration interval is short.
  if (x > t_ - 8.0 * dx_ || x > x_max_ - 4.0 * dx_)
    return waveguide_exact(t_, x, kappa_, tol_);
  index_t n = static_cast<index_t>(values_.size());
  index_t lo = static_cast<index_t>(std::floor(x / dx_)) - 2;
  lo = std::max<index_t>(0, std::min(lo, n - 6));
  double value = 0.0;
  for (index_t i = lo; i < lo + 6; ++i) {
    double weight = 1.0;
    double xi = static_cast<double>(i) * dx_;
    for (index_t j = lo; j < lo + 6; ++j) {
      if (j == i) continue;
      double xj = static_cast<double>(j) * dx_;
      weight *= (x - xj) / (xi - xj);
    }
    value += weight * values_[i];
  }
  return value;
}

}  // namespace dcm
