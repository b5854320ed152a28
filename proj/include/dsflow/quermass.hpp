#pragma once

// Quermassintegrals of spacelike graphs, their values on coordinate slices,
// the Alexandrov-Fenchel comparison between A_1 and A_2, Minkowski-formula
// residuals and the first-variation check.
//
//   A_{-1} = (n+1) vol(region between the graph and {0} x S^n)
//   A_0    = area
//   A_l    = int E_l dmu - l/(n+2-l) A_{l-2},   l = 1..n
//
// The slice functions phi_l(rho) = A_l({rho} x S^n) are the comparison
// functions of the inequality A_2 <= phi_2(phi_1^{-1}(A_1)).

#include <span>
#include <vector>

#include "dsflow/geometry.hpp"

namespace dsflow {

struct QuermassVector {
  int n = 0;
  int k_max = 2;
  std::vector<double> values;  // values[l + 1] = A_l, l = -1..k_max

  double operator()(int l) const { return values.at(static_cast<std::size_t>(l + 1)); }
};

/// int_0^r cosh^n(s) ds, exact by the reduction formula.
double cosh_power_integral(int n, double r);

QuermassVector quermassintegrals(const GeometryFields& fields, int k_max = 2);

double slice_phi(double rho, int l, int n);
/// d phi_1 / d rho = |S^n| (n-1) cosh^{n-2}(rho) sinh^2(rho) > 0 for rho > 0.
double slice_phi1_derivative(double rho, int n);
/// rho with phi_1(rho) = target. Throws Error(domain) for target <= 0.
double invert_phi1(double target, int n);

struct AFReport {
  double A1 = 0.0;
  double A2 = 0.0;
  double rho_star = 0.0;  // phi_1^{-1}(A_1)
  double bound = 0.0;     // phi_2(rho_star)
  double slack = 0.0;     // bound - A_2
};

/// NaN fields when A_1 <= 0 (outside the range of phi_1).
AFReport af_check(const QuermassVector& q);

/// int u E_k dmu - int lambda' E_{k-1} dmu.
double minkowski_residual(const GeometryFields& fields, int k);

/// (n-l) int E_{l+1} speed dmu, the predicted dA_l/dt (l = -1..n).
double variation_rhs(const GeometryFields& fields, int l);
/// (n-l) int |E_{l+1} speed| dmu, a magnitude for relative comparisons.
double variation_scale(const GeometryFields& fields, int l);

struct VariationSample {
  double t = 0.0;
  double A = 0.0;      // A_l(t)
  double rhs = 0.0;    // variation_rhs at t
  double scale = 0.0;  // variation_scale at t
};

struct VariationPoint {
  double t = 0.0;
  double lhs = 0.0;       // three-point central difference of A_l
  double rhs = 0.0;
  double mismatch = 0.0;  // lhs - rhs
  double relative = 0.0;  // |mismatch| / scale (0 when scale is 0 and mismatch is 0)
};

/// Central-difference dA_l/dt at every interior sample, compared with the
/// predicted variation. Needs at least three samples with increasing times.
std::vector<VariationPoint> variation_check(std::span<const VariationSample> samples);

}  // namespace dsflow
