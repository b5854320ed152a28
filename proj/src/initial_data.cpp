#include "dsflow/initial_data.hpp"

#include <cmath>
#include <random>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gegenbauer.hpp>
#include <fmt/format.h>

#include "dsflow/errors.hpp"

namespace dsflow {

double zonal_harmonic(int n, int degree, double theta) {
  if (n < 2 || degree < 0) throw Error(ErrorKind::invalid_argument, "zonal harmonic needs n >= 2, degree >= 0");
  const double x = std::cos(theta);
  if (n == 2) return std::legendre(static_cast<unsigned>(degree), x);
  const double alpha = 0.5 * (n - 1);
  const double at_pole = boost::math::binomial_coefficient<double>(
      static_cast<unsigned>(degree + n - 2), static_cast<unsigned>(degree));
  return boost::math::gegenbauer(static_cast<unsigned>(degree), alpha, x) / at_pole;
}

double real_harmonic(int degree, int order, double theta, double phi) {
  const int m = std::abs(order);
  if (degree < 0 || m > degree) {
    throw Error(ErrorKind::invalid_argument, fmt::format("invalid harmonic ({}, {})", degree, order));
  }
  const double p = std::assoc_legendre(static_cast<unsigned>(degree), static_cast<unsigned>(m), std::cos(theta));
  if (order == 0) return p;
  const double schmidt = std::sqrt(2.0 * std::exp(std::lgamma(degree - m + 1.0) - std::lgamma(degree + m + 1.0)));
  return schmidt * p * (order > 0 ? std::cos(m * phi) : std::sin(m * phi));
}

void validate_modes(GridKind kind, std::span<const HarmonicMode> modes) {
  for (const auto& mode : modes) {
    if (mode.degree < 0 || std::abs(mode.order) > mode.degree) {
      throw Error(ErrorKind::invalid_argument,
                  fmt::format("mode ({}, {}) needs degree >= 0 and |order| <= degree", mode.degree, mode.order));
    }
    if (kind == GridKind::axisymmetric && mode.order != 0) {
      throw Error(ErrorKind::invalid_argument,
                  fmt::format("mode ({}, {}) is not zonal; axisymmetric grids need order 0", mode.degree, mode.order));
    }
    if (!std::isfinite(mode.amplitude)) throw Error(ErrorKind::invalid_argument, "mode amplitude must be finite");
  }
}

ScalarField slice_field(GridPtr grid, double rho) { return ScalarField(std::move(grid), rho); }

ScalarField perturbed_field(GridPtr grid, double rho0, std::span<const HarmonicMode> modes) {
  validate_modes(grid->kind(), modes);
  ScalarField r(grid, rho0);
  const int n = grid->dim();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double theta = grid->theta(i);
    for (const auto& mode : modes) {
      const double y = grid->kind() == GridKind::axisymmetric
                           ? zonal_harmonic(n, mode.degree, theta)
                           : real_harmonic(mode.degree, mode.order, theta, grid->phi(i));
      r[i] += mode.amplitude * y;
    }
  }
  return r;
}

std::vector<HarmonicMode> random_modes(GridKind kind, int count, double amplitude, std::uint64_t seed,
                                       int max_degree) {
  if (count < 0 || max_degree < 1) throw Error(ErrorKind::invalid_argument, "random modes need count >= 0, max_degree >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> degree_dist(1, max_degree);
  std::uniform_real_distribution<double> amp_dist(-amplitude, amplitude);
  std::vector<HarmonicMode> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    HarmonicMode mode;
    mode.degree = degree_dist(rng);
    if (kind == GridKind::latlong) {
      mode.order = std::uniform_int_distribution<int>(-mode.degree, mode.degree)(rng);
    }
    mode.amplitude = amp_dist(rng);
    out.push_back(mode);
  }
  return out;
}

InitialData build_initial_data(GridPtr grid, double rho0, std::vector<HarmonicMode> modes, int k,
                               const FlowConfig& config, bool auto_shrink, int max_halvings) {
  if (!(rho0 > 0.0)) throw Error(ErrorKind::invalid_argument, "rho0 must be positive");
  validate_modes(grid->kind(), modes);
  for (int halvings = 0;; ++halvings) {
    try {
      GraphState state = make_state(perturbed_field(grid, rho0, modes), k, config);
      return InitialData{std::move(state), std::move(modes), halvings};
    } catch (const Error&) {
      if (!auto_shrink || halvings >= max_halvings || modes.empty()) {
        throw;
      }
      for (auto& mode : modes) mode.amplitude *= 0.5;
    }
  }
}

}  // namespace dsflow
