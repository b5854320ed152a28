#include "dsflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "dsflow/errors.hpp"
#include "dsflow/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsflow {

namespace {

std::array<double, 2> symmetric_2x2_eigenvalues(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  return {mean - radius, mean + radius};
}

// Runs body(i) for i in [0, count); errors thrown by body are collected and
// the one at the smallest index is rethrown so failures are reproducible.
template <typename Body>
void for_each_node(std::size_t count, Body&& body) {
  const int workers = worker_count();
  if (workers <= 1 || count < kParallelThreshold) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::size_t> error_index(static_cast<std::size_t>(workers), count);
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long long i = 0; i < n; ++i) {
#ifdef _OPENMP
    const int tid = omp_get_thread_num();
#else
    const int tid = 0;
#endif
    if (error_index[tid] != count) continue;
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[tid] = std::current_exception();
      error_index[tid] = static_cast<std::size_t>(i);
    }
  }
  std::size_t first = count;
  std::exception_ptr error;
  for (std::size_t w = 0; w < errors.size(); ++w) {
    if (errors[w] && error_index[w] < first) {
      first = error_index[w];
      error = errors[w];
    }
  }
  if (error) std::rethrow_exception(error);
}

void frame_derivatives(const DerivativeBundle& b, std::size_t node, double* grad, double* hess) {
  const int n = b.dim;
  for (int i = 0; i < n; ++i) {
    grad[i] = b.frame_grad(node, i);
    for (int j = 0; j < n; ++j) hess[i * n + j] = b.frame_hess(node, i, j);
  }
}

void require_bundle(const ScalarField& r, const DerivativeBundle& b) {
  if (!b.has_gradient() || !b.has_hessian() || b.grid != r.grid) {
    throw Error(ErrorKind::invalid_argument, "derivative bundle must hold gradient and Hessian of r");
  }
}

double chart_det_sigma(const Grid& grid, std::size_t node) {
  double det = 1.0;
  for (int i = 0; i < grid.dim(); ++i) det *= grid.metric_scale(node, i) * grid.metric_scale(node, i);
  return det;
}

// Difference tensor C^k_ij between the Levi-Civita connections of g and sigma.
// From D g = 2 lambda lambda' dr (x) sigma - D^2 r (x) dr - dr (x) D^2 r and
// q = g^{-1} Dr:
//   C^k_ij = lambda lambda' (ginv_kj p_i + ginv_ki p_j - q_k delta_ij) - H_ij q_k.
struct ConnectionDifference {
  int n;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> c{};

  double operator()(int k, int i, int j) const { return c[(k * n + i) * n + j]; }
};

ConnectionDifference connection_difference(const NodeGeometry& ng) {
  ConnectionDifference cd{ng.n};
  const int n = ng.n;
  const Vec q = ng.ginv * ng.grad;
  const double ll = ng.lambda * ng.lambda_prime;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = ll * (ng.ginv(k, j) * ng.grad[i] + ng.ginv(k, i) * ng.grad[j]);
        if (i == j) v -= ll * q[k];
        v -= ng.hess(i, j) * q[k];
        cd.c[(k * n + i) * n + j] = v;
      }
  return cd;
}

// g-Hessian of a scalar from its sigma-derivatives at a node, frame components.
Mat induced_hessian(const NodeGeometry& ng, const ConnectionDifference& cd,
                    const DerivativeBundle& fd, std::size_t node) {
  const int n = ng.n;
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = fd.frame_hess(node, i, j);
      for (int k = 0; k < n; ++k) v -= cd(k, i, j) * fd.frame_grad(node, k);
      out(i, j) = v;
    }
  return out;
}

}  // namespace

Vec principal_curvatures(const Mat& h, const Vec& grad, double lambda, double upsilon) {
  const int n = static_cast<int>(h.rows());
  Mat s = Mat::Identity(n, n);
  const double norm = grad.norm();
  if (norm > 0.0) {
    const Vec qhat = grad / norm;
    s += (1.0 / upsilon - 1.0) * qhat * qhat.transpose();
  }
  s /= lambda;
  const Mat m = s * h * s;
  Vec kappa(n);
  if (n == 2) {
    const auto ev = symmetric_2x2_eigenvalues(m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1));
    kappa << ev[0], ev[1];
    return kappa;
  }
  bool diagonal = true;
  for (int i = 0; i < n && diagonal; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && m(i, j) != 0.0) {
        diagonal = false;
        break;
      }
  if (diagonal) {
    for (int i = 0; i < n; ++i) kappa[i] = m(i, i);
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::numerical, "eigen solver failed for the shape operator");
    }
    kappa = solver.eigenvalues();
  }
  std::sort(kappa.data(), kappa.data() + n);
  return kappa;
}

std::array<double, 2> principal_curvatures_quadratic(const Mat& g, const Mat& h) {
  if (g.rows() != 2) throw Error(ErrorKind::invalid_argument, "quadratic route requires n = 2");
  const double a = g.determinant();
  const double b = -(g(0, 0) * h(1, 1) + g(1, 1) * h(0, 0) - 2.0 * g(0, 1) * h(0, 1));
  const double c = h.determinant();
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double r1 = q / a;
  double r2 = q != 0.0 ? c / q : r1;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

NodeGeometry node_geometry(double r, std::span<const double> grad_frame,
                           std::span<const double> hess_frame, const GeometryOptions& options,
                           std::size_t node_id) {
  NodeGeometry ng;
  const int n = static_cast<int>(grad_frame.size());
  ng.n = n;
  ng.r = r;
  ng.lambda = WarpProfile::lambda(r);
  ng.lambda_prime = WarpProfile::lambda_prime(r);
  ng.grad.resize(n);
  ng.hess.resize(n, n);
  for (int i = 0; i < n; ++i) {
    ng.grad[i] = grad_frame[i];
    for (int j = 0; j < n; ++j) ng.hess(i, j) = hess_frame[i * n + j];
  }
  ng.grad_norm2 = ng.grad.squaredNorm();
  const double lam = ng.lambda;
  const double lam2 = lam * lam;
  if (!(ng.grad_norm2 < lam2)) {
    throw Error(ErrorKind::null_degeneration,
                fmt::format("null degeneration at node {}: |Dr|^2 = {:.6g} >= lambda^2 = {:.6g}",
                            node_id, ng.grad_norm2, lam2),
                node_id);
  }
  const double gnorm = std::sqrt(ng.grad_norm2);
  ng.upsilon = std::sqrt((lam - gnorm) * (lam + gnorm)) / lam;
  if (!(ng.upsilon > options.upsilon_min)) {
    throw Error(ErrorKind::near_null,
                fmt::format("near-null hypersurface at node {}: upsilon = {:.6g} <= {:.6g}", node_id,
                            ng.upsilon, options.upsilon_min),
                node_id);
  }
  ng.u = lam / ng.upsilon;
  const Mat ppt = ng.grad * ng.grad.transpose();
  const Mat id = Mat::Identity(n, n);
  ng.g = lam2 * id - ppt;
  ng.ginv = (id + ppt / (lam2 * ng.upsilon * ng.upsilon)) / lam2;
  ng.detg_frame = std::pow(lam2, n) * ng.upsilon * ng.upsilon;
  ng.h = (ng.hess + lam * ng.lambda_prime * id - 2.0 * (ng.lambda_prime / lam) * ppt) / ng.upsilon;
  ng.h = 0.5 * (ng.h + ng.h.transpose()).eval();
  ng.shape = ng.ginv * ng.h;
  ng.kappa = principal_curvatures(ng.h, ng.grad, lam, ng.upsilon);
  if (!ng.kappa.allFinite()) {
    throw Error(ErrorKind::numerical, fmt::format("non-finite curvature at node {}", node_id), node_id);
  }
  return ng;
}

MetricFields induced_metric(const ScalarField& r, const DerivativeBundle& bundle) {
  require_bundle(r, bundle);
  const Grid& grid = *r.grid;
  const int n = grid.dim();
  MetricFields out{TensorField(n, grid.size()), TensorField(n, grid.size()),
                   std::vector<double>(grid.size())};
  std::array<double, kMaxDim> grad{};
  std::array<double, kMaxDim * kMaxDim> hess{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    frame_derivatives(bundle, i, grad.data(), hess.data());
    const double lam = WarpProfile::lambda(r[i]);
    double norm2 = 0.0;
    for (int a = 0; a < n; ++a) norm2 += grad[a] * grad[a];
    if (!(norm2 < lam * lam)) {
      throw Error(ErrorKind::null_degeneration,
                  fmt::format("null degeneration at node {}: |Dr|^2 = {:.6g} >= lambda^2 = {:.6g}",
                              i, norm2, lam * lam),
                  i);
    }
    const double ups2 = 1.0 - norm2 / (lam * lam);
    auto g = out.g.at(i);
    auto ginv = out.ginv.at(i);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double pp = grad[a] * grad[b];
        g(a, b) = (a == b ? lam * lam : 0.0) - pp;
        ginv(a, b) = ((a == b ? 1.0 : 0.0) + pp / (lam * lam * ups2)) / (lam * lam);
      }
    out.detg[i] = std::pow(lam * lam, n) * ups2 * chart_det_sigma(grid, i);
  }
  return out;
}

SupportFields gradient_and_support(const ScalarField& r, const DerivativeBundle& bundle,
                                   const GeometryOptions& options) {
  require_bundle(r, bundle);
  const Grid& grid = *r.grid;
  const int n = grid.dim();
  SupportFields out{std::vector<double>(grid.size()), std::vector<double>(grid.size())};
  std::array<double, kMaxDim> grad{};
  std::array<double, kMaxDim * kMaxDim> hess{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    frame_derivatives(bundle, i, grad.data(), hess.data());
    const NodeGeometry ng = node_geometry(r[i], std::span<const double>(grad.data(), n),
                                          std::span<const double>(hess.data(), n * n), options, i);
    out.upsilon[i] = ng.upsilon;
    out.u[i] = ng.u;
  }
  return out;
}

TensorField second_fundamental_form(const ScalarField& r, const DerivativeBundle& bundle,
                                    std::span<const double> upsilon) {
  require_bundle(r, bundle);
  const Grid& grid = *r.grid;
  const int n = grid.dim();
  TensorField h(n, grid.size());
  std::array<double, kMaxDim> grad{};
  std::array<double, kMaxDim * kMaxDim> hess{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    frame_derivatives(bundle, i, grad.data(), hess.data());
    const double lam = WarpProfile::lambda(r[i]);
    const double lp = WarpProfile::lambda_prime(r[i]);
    auto hi = h.at(i);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        hi(a, b) = (hess[a * n + b] + (a == b ? lam * lp : 0.0) - 2.0 * lp / lam * grad[a] * grad[b]) /
                   upsilon[i];
      }
  }
  return h;
}

CurvatureFields shape_and_curvatures(const TensorField& g, const TensorField& ginv,
                                     const TensorField& h) {
  const int n = g.dim;
  const std::size_t nodes = g.data.size() / (n * n);
  CurvatureFields out{TensorField(n, nodes), std::vector<double>(nodes * n)};
  for (std::size_t i = 0; i < nodes; ++i) {
    const Mat gi = g.at(i);
    const Mat hi = h.at(i);
    out.shape.at(i) = ginv.at(i) * hi;
    // Symmetric square root of g, general route (no graph structure assumed).
    Eigen::SelfAdjointEigenSolver<Mat> gs(gi);
    if (gs.info() != Eigen::Success || gs.eigenvalues().minCoeff() <= 0.0) {
      throw Error(ErrorKind::numerical, fmt::format("metric not positive definite at node {}", i), i);
    }
    const Mat isqrt = gs.operatorInverseSqrt();
    const Mat m = isqrt * hi * isqrt;
    Eigen::SelfAdjointEigenSolver<Mat> ms(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    if (ms.info() != Eigen::Success) {
      throw Error(ErrorKind::numerical, fmt::format("eigen solver failed at node {}", i), i);
    }
    Vec kappa = ms.eigenvalues();
    std::sort(kappa.data(), kappa.data() + n);
    for (int a = 0; a < n; ++a) out.kappa[i * n + a] = kappa[a];
  }
  return out;
}

GeometryFields assemble(const ScalarField& r, const DerivativeBundle& bundle, int k,
                        const GeometryOptions& options) {
  require_bundle(r, bundle);
  const Grid& grid = *r.grid;
  const int n = grid.dim();
  if (k < 1 || k > n) {
    throw Error(ErrorKind::invalid_argument, fmt::format("quotient index k={} outside [1, {}]", k, n));
  }
  const std::size_t size = grid.size();
  GeometryFields f;
  f.grid = r.grid;
  f.n = n;
  f.k = k;
  f.r = r.values;
  f.lambda.resize(size);
  f.lambda_prime.resize(size);
  f.upsilon.resize(size);
  f.u.resize(size);
  f.detg.resize(size);
  f.F.resize(size);
  f.gradF_sum.resize(size);
  f.speed.resize(size);
  f.area_density.resize(size);
  f.grad.resize(size * n);
  f.hess.resize(size * n * n);
  f.g = TensorField(n, size);
  f.ginv = TensorField(n, size);
  f.h = TensorField(n, size);
  f.shape = TensorField(n, size);
  f.kappa.resize(size * n);
  f.E.resize(size * (n + 1));
  f.gradF.resize(size * n);

  for_each_node(size, [&](std::size_t i) {
    double* grad = f.grad.data() + i * n;
    double* hess = f.hess.data() + i * n * n;
    frame_derivatives(bundle, i, grad, hess);
    const NodeGeometry ng = node_geometry(r[i], std::span<const double>(grad, n),
                                          std::span<const double>(hess, n * n), options, i);
    f.lambda[i] = ng.lambda;
    f.lambda_prime[i] = ng.lambda_prime;
    f.upsilon[i] = ng.upsilon;
    f.u[i] = ng.u;
    f.detg[i] = ng.detg_frame * chart_det_sigma(grid, i);
    f.g.at(i) = ng.g;
    f.ginv.at(i) = ng.ginv;
    f.h.at(i) = ng.h;
    f.shape.at(i) = ng.shape;
    for (int a = 0; a < n; ++a) f.kappa[i * n + a] = ng.kappa[a];
    const CurvatureVector kappa(std::span<const double>(ng.kappa.data(), n));
    SymmetricValues s;
    try {
      s = symmetric_values(kappa, k);
    } catch (const Error&) {
      std::string list;
      for (int a = 0; a < n; ++a) list += fmt::format("{}{:.6g}", a ? ", " : "", ng.kappa[a]);
      throw Error(ErrorKind::convexity_lost,
                  fmt::format("k-convexity lost at node {} (theta = {:.6g}): kappa = ({}), k = {}", i,
                              grid.theta(i), list, k),
                  i);
    }
    for (int j = 0; j <= n; ++j) f.E[i * (n + 1) + j] = s.E[j];
    double sum = 0.0;
    for (int a = 0; a < n; ++a) {
      f.gradF[i * n + a] = s.gradF[a];
      sum += s.gradF[a];
    }
    f.F[i] = s.F;
    f.gradF_sum[i] = sum;
    f.speed[i] = ng.u - ng.lambda_prime / s.F;
    f.area_density[i] = std::pow(ng.lambda, n) * ng.upsilon;
  });
  return f;
}

GeometryFields assemble(const ScalarField& r, int k, const GeometryOptions& options) {
  return assemble(r, derivatives(r), k, options);
}

IdentityResiduals hessian_identity_residuals(const GeometryFields& fields,
                                             const DerivativeBundle& bundle) {
  const Grid& grid = *fields.grid;
  const int n = fields.n;
  if (bundle.grid != fields.grid) {
    throw Error(ErrorKind::invalid_argument, "bundle and fields live on different grids");
  }
  const DerivativeBundle dlp = derivatives(ScalarField(fields.grid, fields.lambda_prime));
  const DerivativeBundle du = derivatives(ScalarField(fields.grid, fields.u));
  const bool axisymmetric = grid.kind() == GridKind::axisymmetric;

  // Polar derivative of the frame components of h (diagonal in axisymmetric mode).
  std::vector<double> dh;
  if (axisymmetric) {
    dh.assign(grid.size() * n, 0.0);
    const int nt = grid.n_theta();
    auto comp = [&](int j, int a) {
      if (j < 0) j = -1 - j;
      if (j >= nt) j = 2 * nt - 1 - j;
      return fields.h.at(static_cast<std::size_t>(j))(a, a);
    };
    for (int j = 0; j < nt; ++j)
      for (int a = 0; a < n; ++a) dh[j * n + a] = (comp(j + 1, a) - comp(j - 1, a)) / (2.0 * grid.dtheta());
  }

  IdentityResiduals res;
  double hos = 0.0;
  std::array<double, kMaxDim> grad{};
  std::array<double, kMaxDim * kMaxDim> hess{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    frame_derivatives(bundle, i, grad.data(), hess.data());
    const NodeGeometry ng = node_geometry(fields.r[i], std::span<const double>(grad.data(), n),
                                          std::span<const double>(hess.data(), n * n),
                                          GeometryOptions{0.0}, i);
    const ConnectionDifference cd = connection_difference(ng);

    const Mat lhs_hol = induced_hessian(ng, cd, dlp, i);
    const Mat rhs_hol = ng.u * ng.h - ng.lambda_prime * ng.g;
    res.hol = std::max(res.hol, (lhs_hol - rhs_hol).cwiseAbs().maxCoeff());

    if (!axisymmetric) continue;
    // nabla_0 h_ij = D_0 h_ij - C^m_0i h_mj - C^m_0j h_im; only the polar
    // component of nabla lambda' = lambda g^{-1} Dr is nonzero here.
    Mat nabla0_h(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double v = (a == b) ? dh[i * n + a] : 0.0;
        for (int m = 0; m < n; ++m) v -= cd(m, 0, a) * ng.h(m, b) + cd(m, 0, b) * ng.h(a, m);
        nabla0_h(a, b) = v;
      }
    const Vec q = ng.ginv * ng.grad;
    const Mat lhs_hos = induced_hessian(ng, cd, du, i);
    const Mat rhs_hos =
        -ng.lambda_prime * ng.h + ng.lambda * q[0] * nabla0_h + ng.u * ng.h * ng.ginv * ng.h;
    hos = std::max(hos, (lhs_hos - rhs_hos).cwiseAbs().maxCoeff());
  }
  if (axisymmetric) res.hos = hos;
  return res;
}

}  // namespace dsflow
