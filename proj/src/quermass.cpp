#include "dsflow/quermass.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "dsflow/errors.hpp"

namespace dsflow {

double cosh_power_integral(int n, double r) {
  if (n == 0) return r;
  if (n == 1) return std::sinh(r);
  return std::pow(std::cosh(r), n - 1) * std::sinh(r) / n +
         static_cast<double>(n - 1) / n * cosh_power_integral(n - 2, r);
}

QuermassVector quermassintegrals(const GeometryFields& fields, int k_max) {
  const int n = fields.n;
  if (k_max < 0 || k_max > n) {
    throw Error(ErrorKind::invalid_argument, fmt::format("k_max={} outside [0, n={}]", k_max, n));
  }
  const Grid& grid = *fields.grid;
  const std::size_t size = fields.size();
  QuermassVector q;
  q.n = n;
  q.k_max = k_max;
  q.values.assign(static_cast<std::size_t>(k_max + 2), 0.0);

  std::vector<double> work(size);
  for (std::size_t i = 0; i < size; ++i) work[i] = cosh_power_integral(n, fields.r[i]);
  q.values[0] = (n + 1) * integrate(grid, work);
  q.values[1] = integrate(grid, fields.area_density);
  for (int l = 1; l <= k_max; ++l) {
    for (std::size_t i = 0; i < size; ++i) work[i] = fields.e(i, l);
    const double curvature_integral = integrate(grid, work, fields.area_density);
    q.values[l + 1] = curvature_integral - static_cast<double>(l) / (n + 2 - l) * q.values[l - 1];
  }
  return q;
}

namespace {

// phi_1 / |S^n| for small rho, integrating its derivative to avoid the
// cancellation in cosh^{n-1} sinh - int cosh^n.
double phi1_small(double rho, int n) {
  auto integrand = [n](double s) {
    const double sh = std::sinh(s);
    return (n - 1) * std::pow(std::cosh(s), n - 2) * sh * sh;
  };
  return boost::math::quadrature::gauss<double, 20>::integrate(integrand, 0.0, rho);
}

}  // namespace

double slice_phi(double rho, int l, int n) {
  if (l < -1 || l > n) throw Error(ErrorKind::invalid_argument, fmt::format("slice index l={} outside [-1, n]", l));
  const double area = sphere_area(n);
  if (l == -1) return (n + 1) * area * cosh_power_integral(n, rho);
  if (l == 0) return area * std::pow(std::cosh(rho), n);
  if (l == 1 && rho < 0.5) return area * phi1_small(rho, n);
  const double curvature_integral = area * std::pow(std::cosh(rho), n) * std::pow(std::tanh(rho), l);
  return curvature_integral - static_cast<double>(l) / (n + 2 - l) * slice_phi(rho, l - 2, n);
}

double slice_phi1_derivative(double rho, int n) {
  const double sh = std::sinh(rho);
  return sphere_area(n) * (n - 1) * std::pow(std::cosh(rho), n - 2) * sh * sh;
}

double invert_phi1(double target, int n) {
  if (!(target > 0.0) || !std::isfinite(target)) {
    throw Error(ErrorKind::domain, fmt::format("phi_1 inverse needs a positive target, got {:.6g}", target));
  }
  double lo = 0.0;
  double hi = 1.0;
  while (slice_phi(hi, 1, n) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) throw Error(ErrorKind::domain, "phi_1 inverse target out of range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-3 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slice_phi(mid, 1, n) < target ? lo : hi) = mid;
  }
  double rho = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double residual = slice_phi(rho, 1, n) - target;
    if (std::abs(residual) <= 1e-14 * target) break;
    (residual < 0.0 ? lo : hi) = rho;
    double next = rho - residual / slice_phi1_derivative(rho, n);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == rho) break;
    rho = next;
  }
  return rho;
}

AFReport af_check(const QuermassVector& q) {
  AFReport report;
  report.A1 = q(1);
  report.A2 = q(2);
  if (!(report.A1 > 0.0)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.rho_star = report.bound = report.slack = nan;
    return report;
  }
  report.rho_star = invert_phi1(report.A1, q.n);
  report.bound = slice_phi(report.rho_star, 2, q.n);
  report.slack = report.bound - report.A2;
  return report;
}

double minkowski_residual(const GeometryFields& fields, int k) {
  if (k < 1 || k > fields.n) {
    throw Error(ErrorKind::invalid_argument, fmt::format("Minkowski index k={} outside [1, n]", k));
  }
  std::vector<double> work(fields.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    work[i] = fields.u[i] * fields.e(i, k) - fields.lambda_prime[i] * fields.e(i, k - 1);
  }
  return integrate(*fields.grid, work, fields.area_density);
}

double variation_rhs(const GeometryFields& fields, int l) {
  std::vector<double> work(fields.size());
  for (std::size_t i = 0; i < work.size(); ++i) work[i] = fields.e(i, l + 1) * fields.speed[i];
  return (fields.n - l) * integrate(*fields.grid, work, fields.area_density);
}

double variation_scale(const GeometryFields& fields, int l) {
  std::vector<double> work(fields.size());
  for (std::size_t i = 0; i < work.size(); ++i) work[i] = std::abs(fields.e(i, l + 1) * fields.speed[i]);
  return (fields.n - l) * integrate(*fields.grid, work, fields.area_density);
}

std::vector<VariationPoint> variation_check(std::span<const VariationSample> samples) {
  if (samples.size() < 3) {
    throw Error(ErrorKind::invalid_argument, "variation check needs at least three samples");
  }
  std::vector<VariationPoint> out;
  out.reserve(samples.size() - 2);
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const auto& a = samples[i - 1];
    const auto& b = samples[i];
    const auto& c = samples[i + 1];
    const double h1 = b.t - a.t;
    const double h2 = c.t - b.t;
    if (!(h1 > 0.0 && h2 > 0.0)) {
      throw Error(ErrorKind::invalid_argument, "variation samples must have increasing times");
    }
    VariationPoint p;
    p.t = b.t;
    p.lhs = -h2 / (h1 * (h1 + h2)) * a.A + (h2 - h1) / (h1 * h2) * b.A + h1 / (h2 * (h1 + h2)) * c.A;
    p.rhs = b.rhs;
    p.mismatch = p.lhs - p.rhs;
    p.relative = b.scale > 0.0 ? std::abs(p.mismatch) / b.scale : std::abs(p.mismatch);
    out.push_back(p);
  }
  return out;
}

}  // namespace dsflow
