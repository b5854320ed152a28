#pragma once

// Perturbed coordinate slices r = rho0 + sum_m eps_m Y_m.
//
// Axisymmetric grids use zonal harmonics of S^n, the Gegenbauer polynomial
// C_l^{(n-1)/2}(cos theta) scaled to 1 at the north pole (Legendre for n = 2).
// Latlong grids use Schmidt semi-normalised real harmonics
// S_l^m(cos theta) cos(m phi) for m >= 0 and S_l^{|m|}(cos theta) sin(|m| phi)
// for m < 0, with S_l^m = sqrt(2 (l-m)!/(l+m)!) P_l^m for m > 0, S_l^0 = P_l,
// and no Condon-Shortley phase. All are bounded by 1 and order-0 modes agree
// with the axisymmetric ones.

#include <cstdint>
#include <span>
#include <vector>

#include "dsflow/flow.hpp"
#include "dsflow/grid.hpp"

namespace dsflow {

struct HarmonicMode {
  int degree = 0;
  int order = 0;
  double amplitude = 0.0;
};

double zonal_harmonic(int n, int degree, double theta);
double real_harmonic(int degree, int order, double theta, double phi);

/// Throws Error(invalid_argument) for negative degree, |order| > degree, or a
/// nonzero order on an axisymmetric grid.
void validate_modes(GridKind kind, std::span<const HarmonicMode> modes);

ScalarField slice_field(GridPtr grid, double rho);
ScalarField perturbed_field(GridPtr grid, double rho0, std::span<const HarmonicMode> modes);

/// `count` modes with degree in 1..max_degree, order uniform in [-l, l]
/// (0 on axisymmetric grids) and amplitude uniform in [-amplitude, amplitude].
std::vector<HarmonicMode> random_modes(GridKind kind, int count, double amplitude, std::uint64_t seed,
                                       int max_degree = 4);

struct InitialData {
  GraphState state;
  std::vector<HarmonicMode> modes;  // after any shrinking
  int halvings = 0;
};

/// Validates r > 0, spacelikeness and k-convexity. With auto_shrink the mode
/// amplitudes are halved until the data is valid (at most max_halvings
/// times); otherwise the first failure is rethrown.
InitialData build_initial_data(GridPtr grid, double rho0, std::vector<HarmonicMode> modes, int k,
                               const FlowConfig& config, bool auto_shrink = false,
                               int max_halvings = 30);

}  // namespace dsflow
