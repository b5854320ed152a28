#include "dsflow/grid.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dsflow/errors.hpp"

namespace dsflow {

namespace {

constexpr double kPi = std::numbers::pi;

// Exact integral of sin^m over [a, b] by the reduction formula.
double sin_power_integral(int m, double a, double b) {
  if (m == 0) return b - a;
  if (m == 1) return std::cos(a) - std::cos(b);
  const double boundary =
      -(std::pow(std::sin(b), m - 1) * std::cos(b) - std::pow(std::sin(a), m - 1) * std::cos(a)) / m;
  return boundary + static_cast<double>(m - 1) / m * sin_power_integral(m - 2, a, b);
}

}  // namespace

const char* to_string(GridKind kind) noexcept {
  return kind == GridKind::axisymmetric ? "axisymmetric" : "latlong";
}

double sphere_area(int n) {
  const double half = 0.5 * (n + 1);
  return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

std::shared_ptr<const Grid> Grid::build(GridKind kind, int n, Resolution resolution) {
  if (n < 2) throw Error(ErrorKind::invalid_argument, "sphere dimension n must be >= 2");
  if (resolution.n_theta < 16) {
    throw Error(ErrorKind::invalid_argument, "polar resolution must be >= 16");
  }
  auto grid = std::shared_ptr<Grid>(new Grid());
  grid->kind_ = kind;
  grid->dim_ = n;
  grid->n_theta_ = resolution.n_theta;
  grid->dtheta_ = kPi / resolution.n_theta;
  if (kind == GridKind::latlong) {
    if (n != 2) throw Error(ErrorKind::invalid_argument, "latlong grids require n = 2");
    if (resolution.n_phi < 16 || resolution.n_phi % 2 != 0) {
      throw Error(ErrorKind::invalid_argument, "azimuthal resolution must be even and >= 16");
    }
    grid->n_phi_ = resolution.n_phi;
    grid->dphi_ = 2.0 * kPi / resolution.n_phi;
  } else {
    grid->n_phi_ = 1;
    grid->dphi_ = 0.0;
  }
  grid->sphere_area_ = dsflow::sphere_area(n);

  grid->theta_.resize(grid->n_theta_);
  for (int j = 0; j < grid->n_theta_; ++j) grid->theta_[j] = (j + 0.5) * grid->dtheta_;

  // Cell weights integrate the exact sphere measure over each polar cell.
  const double h = grid->dtheta_;
  const double rest = kind == GridKind::latlong ? grid->dphi_ : dsflow::sphere_area(n - 1);
  grid->weights_.resize(grid->size());
  for (int j = 0; j < grid->n_theta_; ++j) {
    const double th = grid->theta_[j];
    const double w = rest * sin_power_integral(n - 1, th - 0.5 * h, th + 0.5 * h);
    for (int m = 0; m < grid->n_phi_; ++m) grid->weights_[grid->index(j, m)] = w;
  }
  return grid;
}

double Grid::metric_scale(std::size_t node, int i) const noexcept {
  return i == 0 ? 1.0 : std::sin(theta(node));
}

std::vector<double> Grid::christoffel(std::size_t node) const {
  const int n = dim_;
  std::vector<double> gamma(static_cast<std::size_t>(n * n * n), 0.0);
  const double th = theta(node);
  const double sc = std::sin(th) * std::cos(th);
  const double cot = std::cos(th) / std::sin(th);
  for (int a = 1; a < n; ++a) {
    gamma[(0 * n + a) * n + a] = -sc;
    gamma[(a * n + 0) * n + a] = cot;
    gamma[(a * n + a) * n + 0] = cot;
  }
  return gamma;
}

double Grid::spacing(std::size_t node, int i) const noexcept {
  if (i == 0) return dtheta_;
  if (kind_ == GridKind::latlong) return std::sin(theta(node)) * dphi_;
  return std::numeric_limits<double>::infinity();
}

ScalarField::ScalarField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid->size()) {
    throw Error(ErrorKind::invalid_argument, "field size does not match grid");
  }
}

double DerivativeBundle::frame_grad(std::size_t node, int i) const {
  return grad_at(node, i) / grid->metric_scale(node, i);
}

double DerivativeBundle::frame_hess(std::size_t node, int i, int j) const {
  return hess_at(node, i, j) / (grid->metric_scale(node, i) * grid->metric_scale(node, j));
}

namespace {

// Value at polar index j (possibly a ghost row -1 or n_theta) and azimuth m.
struct GhostAccess {
  const Grid& g;
  std::span<const double> f;

  double operator()(int j, int m) const {
    const int nt = g.n_theta();
    const int np = g.n_phi();
    int shift = 0;
    if (j < 0) {
      j = -1 - j;
      shift = np / 2;
    } else if (j >= nt) {
      j = 2 * nt - 1 - j;
      shift = np / 2;
    }
    if (np == 1) shift = 0;
    m = ((m + shift) % np + np) % np;
    return f[g.index(j, m)];
  }
};

DerivativeBundle compute(const ScalarField& field, bool want_grad, bool want_hess) {
  const Grid& g = *field.grid;
  const int n = g.dim();
  DerivativeBundle b;
  b.grid = field.grid;
  b.dim = n;
  const bool need_grad = want_grad || want_hess;
  std::vector<double> grad(g.size() * n, 0.0);
  if (want_hess) b.hess.assign(g.size() * n * n, 0.0);
  const GhostAccess at{g, field.values};
  const double ht = g.dtheta();
  const double hp = g.dphi();
  for (int j = 0; j < g.n_theta(); ++j) {
    const double th = g.theta_at(j);
    const double sc = std::sin(th) * std::cos(th);
    const double cot = std::cos(th) / std::sin(th);
    for (int m = 0; m < g.n_phi(); ++m) {
      const std::size_t node = g.index(j, m);
      const double f0 = at(j, m);
      const double fn = at(j + 1, m);
      const double fs = at(j - 1, m);
      const double f_t = (fn - fs) / (2.0 * ht);
      double f_p = 0.0;
      if (g.kind() == GridKind::latlong) f_p = (at(j, m + 1) - at(j, m - 1)) / (2.0 * hp);
      if (need_grad) {
        grad[node * n + 0] = f_t;
        if (g.kind() == GridKind::latlong) grad[node * n + 1] = f_p;
      }
      if (!want_hess) continue;
      double* H = &b.hess[node * n * n];
      H[0] = (fn - 2.0 * f0 + fs) / (ht * ht);
      if (g.kind() == GridKind::latlong) {
        const double f_pp = (at(j, m + 1) - 2.0 * f0 + at(j, m - 1)) / (hp * hp);
        const double f_tp =
            (at(j + 1, m + 1) - at(j + 1, m - 1) - at(j - 1, m + 1) + at(j - 1, m - 1)) /
            (4.0 * ht * hp);
        H[1] = H[2] = f_tp - cot * f_p;
        H[3] = f_pp + sc * f_t;
      } else {
        for (int a = 1; a < n; ++a) H[a * n + a] = sc * f_t;
      }
    }
  }
  if (want_grad) b.grad = std::move(grad);
  return b;
}

}  // namespace

DerivativeBundle covariant_gradient(const ScalarField& f) { return compute(f, true, false); }
DerivativeBundle covariant_hessian(const ScalarField& f) { return compute(f, false, true); }
DerivativeBundle derivatives(const ScalarField& f) { return compute(f, true, true); }

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

double integrate(const Grid& grid, std::span<const double> f, std::span<const double> weight) {
  if (f.size() != grid.size() || weight.size() != grid.size()) {
    throw Error(ErrorKind::invalid_argument, "integrand shape does not match grid");
  }
  const auto w = grid.weights();
  double sum = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = f[i] * weight[i] * w[i];
    const double t = sum + v;
    c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

double integrate(const Grid& grid, std::span<const double> f) {
  if (f.size() != grid.size()) {
    throw Error(ErrorKind::invalid_argument, "integrand shape does not match grid");
  }
  const auto w = grid.weights();
  double sum = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = f[i] * w[i];
    const double t = sum + v;
    c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

double integrate(const ScalarField& f, const ScalarField& weight) {
  return integrate(*f.grid, f.values, weight.values);
}

double integrate(const ScalarField& f) { return integrate(*f.grid, f.values); }

void write_snapshot(std::ostream& os, const ScalarField& r, double t) {
  const Grid& g = *r.grid;
  fmt::print(os, "# kind={} n={} resolution={}", to_string(g.kind()), g.dim(), g.n_theta());
  if (g.kind() == GridKind::latlong) fmt::print(os, "x{}", g.n_phi());
  fmt::print(os, " t={:.17g}\n", t);
  if (g.kind() == GridKind::latlong) {
    fmt::print(os, "theta phi r\n");
    for (std::size_t i = 0; i < g.size(); ++i) {
      fmt::print(os, "{:.17g} {:.17g} {:.17g}\n", g.theta(i), g.phi(i), r[i]);
    }
  } else {
    fmt::print(os, "theta r\n");
    for (std::size_t i = 0; i < g.size(); ++i) fmt::print(os, "{:.17g} {:.17g}\n", g.theta(i), r[i]);
  }
}

}  // namespace dsflow
