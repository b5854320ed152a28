#pragma once

// Pole-free spherical grids on S^n, second-order covariant differences with
// respect to the round metric sigma, and quadrature.
//
// Two layouts:
//  * axisymmetric: fields depend on the polar angle only, any n >= 2. At each
//    node the remaining n-1 angular coordinates are normal coordinates of
//    S^{n-1} centred at that node, so sigma = diag(1, sin^2, ..., sin^2).
//  * latlong: n = 2, nodes (theta_j, phi_m), sigma = diag(1, sin^2 theta).
//
// Polar nodes are staggered, theta_j = (j + 1/2) * dtheta. Smoothness across
// a pole is imposed through ghost values: in axisymmetric mode f is extended
// evenly (odd extension of d/dtheta f), in latlong mode the ghost of
// (theta_{-1}, phi) is (theta_0, phi + pi).

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace dsflow {

enum class GridKind { axisymmetric, latlong };

const char* to_string(GridKind kind) noexcept;

struct Resolution {
  int n_theta = 0;
  int n_phi = 1;
};

class Grid {
 public:
  static std::shared_ptr<const Grid> build(GridKind kind, int n, Resolution resolution);

  GridKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  int n_theta() const noexcept { return n_theta_; }
  int n_phi() const noexcept { return n_phi_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_theta_) * n_phi_; }
  Resolution resolution() const noexcept { return {n_theta_, n_phi_}; }

  double dtheta() const noexcept { return dtheta_; }
  double dphi() const noexcept { return dphi_; }

  std::size_t index(int j, int m) const noexcept {
    return static_cast<std::size_t>(j) * n_phi_ + static_cast<std::size_t>(m);
  }
  int theta_index(std::size_t node) const noexcept { return static_cast<int>(node / n_phi_); }
  int phi_index(std::size_t node) const noexcept { return static_cast<int>(node % n_phi_); }
  double theta(std::size_t node) const noexcept { return theta_[theta_index(node)]; }
  double theta_at(int j) const noexcept { return theta_[j]; }
  double phi(std::size_t node) const noexcept { return phi_index(node) * dphi_; }

  /// Quadrature weights; sum equals |S^n| up to rounding.
  std::span<const double> weights() const noexcept { return weights_; }
  double sphere_area() const noexcept { return sphere_area_; }

  /// sqrt(sigma_ii) at the node, i = 0 is the polar direction.
  double metric_scale(std::size_t node, int i) const noexcept;
  /// Christoffel symbols Gamma^a_{bc} of sigma in the node chart, a*n*n + b*n + c.
  std::vector<double> christoffel(std::size_t node) const;

  /// Sigma-length of the grid step in direction i at the node.
  double spacing(std::size_t node, int i) const noexcept;

 private:
  Grid() = default;

  GridKind kind_ = GridKind::axisymmetric;
  int dim_ = 2;
  int n_theta_ = 0;
  int n_phi_ = 1;
  double dtheta_ = 0.0;
  double dphi_ = 0.0;
  double sphere_area_ = 0.0;
  std::vector<double> theta_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2).
double sphere_area(int n);

struct ScalarField {
  GridPtr grid;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(GridPtr g, double fill = 0.0) : grid(std::move(g)), values(grid->size(), fill) {}
  ScalarField(GridPtr g, std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

/// First and second covariant derivatives of a scalar field with respect to sigma.
/// Components are in the node chart; frame_* accessors divide by metric scales
/// to give sigma-orthonormal components.
struct DerivativeBundle {
  GridPtr grid;
  int dim = 0;
  std::vector<double> grad;  // size * dim
  std::vector<double> hess;  // size * dim * dim, symmetric

  bool has_gradient() const noexcept { return !grad.empty(); }
  bool has_hessian() const noexcept { return !hess.empty(); }

  double grad_at(std::size_t node, int i) const { return grad[node * dim + i]; }
  double hess_at(std::size_t node, int i, int j) const {
    return hess[(node * dim + i) * dim + j];
  }
  double frame_grad(std::size_t node, int i) const;
  double frame_hess(std::size_t node, int i, int j) const;
};

DerivativeBundle covariant_gradient(const ScalarField& f);
DerivativeBundle covariant_hessian(const ScalarField& f);
/// Gradient and Hessian in one pass.
DerivativeBundle derivatives(const ScalarField& f);

/// Neumaier-compensated sum of values in index order.
double compensated_sum(std::span<const double> values);

/// Sum over nodes of f * weight * quadrature weight, fixed order, compensated.
double integrate(const ScalarField& f, const ScalarField& weight);
double integrate(const ScalarField& f);
double integrate(const Grid& grid, std::span<const double> f, std::span<const double> weight);
double integrate(const Grid& grid, std::span<const double> f);

/// Plain-text table: a header naming kind/n/resolution/t, then one node per row.
void write_snapshot(std::ostream& os, const ScalarField& r, double t);

}  // namespace dsflow
