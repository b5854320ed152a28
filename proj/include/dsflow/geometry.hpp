#pragma once

// Extrinsic geometry of a spacelike graph {(r(theta), theta)} in de Sitter
// space -dr^2 + cosh^2(r) sigma.
//
// All tensors are stored with components in the sigma-orthonormal frame of
// the node chart (sigma_ij = delta_ij there), so e.g. g = lambda^2 I - Dr Dr^T.
// Determinants are reported in the chart, detg = det_frame(g) * det(sigma).

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dsflow/grid.hpp"
#include "dsflow/symfun.hpp"

namespace dsflow {

struct WarpProfile {
  static double lambda(double r) { return std::cosh(r); }
  static double lambda_prime(double r) { return std::sinh(r); }
};

struct GeometryOptions {
  double upsilon_min = 1e-3;
};

/// Row-major n x n tensor per node.
struct TensorField {
  int dim = 0;
  std::vector<double> data;

  TensorField() = default;
  TensorField(int n, std::size_t nodes) : dim(n), data(nodes * n * n, 0.0) {}

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> at(
      std::size_t node) const {
    return {data.data() + node * dim * dim, dim, dim};
  }
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> at(
      std::size_t node) {
    return {data.data() + node * dim * dim, dim, dim};
  }
};

/// Geometry of one node; everything in the sigma-orthonormal frame.
struct NodeGeometry {
  int n = 0;
  double r = 0.0;
  double lambda = 0.0;
  double lambda_prime = 0.0;
  Vec grad;          // D r
  Mat hess;          // sigma-Hessian r_{,ij}
  double grad_norm2 = 0.0;
  Mat g;
  Mat ginv;
  double detg_frame = 0.0;
  double upsilon = 0.0;
  double u = 0.0;
  Mat h;
  Mat shape;         // W = g^{-1} h
  Vec kappa;         // ascending
};

/// Metric, gradient function, support function, second fundamental form and
/// principal curvatures of one node. Throws Error(null_degeneration) when
/// |Dr|^2 >= lambda^2 and Error(near_null) when upsilon <= upsilon_min.
NodeGeometry node_geometry(double r, std::span<const double> grad_frame,
                           std::span<const double> hess_frame, const GeometryOptions& options,
                           std::size_t node_id = 0);

/// Eigenvalues of g^{-1} h through the similarity g^{-1/2} h g^{-1/2}, with
/// g = lambda^2 (I - q q^T) so g^{-1/2} = lambda^{-1} (I + (1/upsilon - 1) qhat qhat^T).
Vec principal_curvatures(const Mat& h, const Vec& grad, double lambda, double upsilon);

/// n = 2 only: roots of det(h - kappa g) = 0, ascending.
std::array<double, 2> principal_curvatures_quadratic(const Mat& g, const Mat& h);

struct MetricFields {
  TensorField g;
  TensorField ginv;
  std::vector<double> detg;  // chart determinant
};

struct SupportFields {
  std::vector<double> upsilon;
  std::vector<double> u;
};

struct CurvatureFields {
  TensorField shape;
  std::vector<double> kappa;  // size * n, ascending per node
};

MetricFields induced_metric(const ScalarField& r, const DerivativeBundle& bundle);
SupportFields gradient_and_support(const ScalarField& r, const DerivativeBundle& bundle,
                                   const GeometryOptions& options = {});
TensorField second_fundamental_form(const ScalarField& r, const DerivativeBundle& bundle,
                                    std::span<const double> upsilon);
CurvatureFields shape_and_curvatures(const TensorField& g, const TensorField& ginv,
                                     const TensorField& h);

/// Full per-node geometry of a graph for the quotient F = E_k / E_{k-1}.
struct GeometryFields {
  GridPtr grid;
  int n = 0;
  int k = 0;
  std::vector<double> r;
  std::vector<double> lambda;
  std::vector<double> lambda_prime;
  std::vector<double> upsilon;
  std::vector<double> u;
  std::vector<double> detg;
  std::vector<double> F;
  std::vector<double> gradF_sum;  // sum_i dF/dkappa_i
  std::vector<double> speed;      // u - lambda'/F
  std::vector<double> area_density;  // lambda^n upsilon
  std::vector<double> grad;       // frame D r, size * n
  std::vector<double> hess;       // frame r_{,ij}, size * n * n
  TensorField g;
  TensorField ginv;
  TensorField h;
  TensorField shape;
  std::vector<double> kappa;      // size * n
  std::vector<double> E;          // size * (n + 1)
  std::vector<double> gradF;      // size * n

  std::size_t size() const noexcept { return r.size(); }
  /// E_j at a node, zero outside 0..n.
  double e(std::size_t node, int j) const {
    return (j < 0 || j > n) ? 0.0 : E[node * (n + 1) + j];
  }
  CurvatureVector kappa_at(std::size_t node) const {
    return CurvatureVector(std::span<const double>(kappa.data() + node * n, n));
  }
};

/// Throws Error(convexity_lost) with the node and curvatures when kappa leaves Gamma_k^+.
GeometryFields assemble(const ScalarField& r, const DerivativeBundle& bundle, int k,
                        const GeometryOptions& options = {});
GeometryFields assemble(const ScalarField& r, int k, const GeometryOptions& options = {});

/// Max-norm residuals of nabla^2 lambda' = u h - lambda' g and, on axisymmetric
/// grids, nabla^2 u = -lambda' h + g(nabla lambda', nabla h) + u h g^{-1} h.
/// Left-hand sides come from finite differences of the lambda' and u fields.
struct IdentityResiduals {
  double hol = 0.0;
  std::optional<double> hos;
};

IdentityResiduals hessian_identity_residuals(const GeometryFields& fields,
                                             const DerivativeBundle& bundle);

}  // namespace dsflow
