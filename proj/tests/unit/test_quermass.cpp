#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dsflow/errors.hpp"
#include "dsflow/initial_data.hpp"
#include "dsflow/quermass.hpp"
#include "support.hpp"

using namespace dsflow;
using std::numbers::pi;

namespace {

GeometryFields perturbed(int n, int N, double amp = 0.1) {
  const auto g = Grid::build(GridKind::axisymmetric, n, {N});
  const HarmonicMode mode{1, 0, amp};
  return assemble(perturbed_field(g, 1.0, std::span<const HarmonicMode>(&mode, 1)), 2);
}

}  // namespace

TEST_SUITE("quermass") {

TEST_CASE("cosh power integrals match adaptive quadrature") {
  for (int n = 0; n <= 7; ++n) {
    for (double r : {0.1, 0.7, 1.5, 2.5}) {
      const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [n](double s) { return std::pow(std::cosh(s), n); }, 0.0, r);
      CHECK(cosh_power_integral(n, r) == doctest::Approx(ref).epsilon(1e-13));
    }
  }
}

TEST_CASE("quermassintegrals of slices are exact") {
  for (int n : {2, 3, 4}) {
    for (double rho : {0.3, 1.0, 2.0}) {
      const auto g = Grid::build(GridKind::axisymmetric, n, {64});
      const auto q = quermassintegrals(assemble(ScalarField(g, rho), 2), std::min(n, 3));
      for (int l = -1; l <= std::min(n, 3); ++l) {
        CHECK(q(l) == doctest::Approx(slice_phi(rho, l, n)).epsilon(1e-12));
      }
    }
  }
  CHECK(slice_phi(1.0, 0, 2) == doctest::Approx(4 * pi * std::cosh(1.0) * std::cosh(1.0)));
}

TEST_CASE("phi_1 is smooth across the small-radius branch") {
  for (int n : {2, 3, 6}) {
    const double below = slice_phi(0.5 - 1e-9, 1, n);
    const double above = slice_phi(0.5 + 1e-9, 1, n);
    CHECK(std::abs(above - below) <= 1e-8 * slice_phi1_derivative(0.5, n) + 1e-14);
    // phi_1 ~ |S^n| (n-1) rho^3 / 3 near 0
    const double r = 1e-3;
    CHECK(slice_phi(r, 1, n) == doctest::Approx(sphere_area(n) * (n - 1) * r * r * r / 3).epsilon(1e-5));
  }
}

TEST_CASE("phi_1 derivative and inverse") {
  for (int n : {2, 3, 5}) {
    for (double rho : {0.05, 0.4, 1.0, 2.0, 3.0}) {
      const double h = 1e-5 * rho;
      const double fd = (slice_phi(rho + h, 1, n) - slice_phi(rho - h, 1, n)) / (2 * h);
      CHECK(fd == doctest::Approx(slice_phi1_derivative(rho, n)).epsilon(1e-7));
      CHECK(invert_phi1(slice_phi(rho, 1, n), n) == doctest::Approx(rho).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(invert_phi1(0.0, 2), Error);
  CHECK_THROWS_AS(invert_phi1(-1.0, 3), Error);
}

TEST_CASE("A_2 is topological in dimension two") {
  const auto q = quermassintegrals(perturbed(2, 256, 0.15), 2);
  CHECK(q(2) == doctest::Approx(-4 * pi).epsilon(1e-5));
}

TEST_CASE("Alexandrov-Fenchel comparison") {
  for (int n : {2, 3}) {
    for (double rho : {0.3, 1.0, 2.0}) {
      const auto g = Grid::build(GridKind::axisymmetric, n, {64});
      const auto af = af_check(quermassintegrals(assemble(ScalarField(g, rho), 2), 2));
      CHECK(af.rho_star == doctest::Approx(rho).epsilon(1e-12));
      CHECK(std::abs(af.slack) <= 1e-10 * std::max(1.0, std::abs(af.bound)));
    }
  }
  const auto af = af_check(quermassintegrals(perturbed(3, 256), 2));
  CHECK(af.slack > 1e-6);

  QuermassVector degenerate{2, 2, {1.0, 1.0, -0.5, 1.0}};
  CHECK(std::isnan(af_check(degenerate).slack));
}

TEST_CASE("Minkowski residuals") {
  for (int n : {2, 3}) {
    const auto g = Grid::build(GridKind::axisymmetric, n, {64});
    const auto f = assemble(ScalarField(g, 1.0), 2);
    for (int k = 1; k <= n; ++k) CHECK(std::abs(minkowski_residual(f, k)) <= 1e-12);
    double prev = 0.0;
    for (int N : {128, 256, 512}) {
      const double res = std::abs(minkowski_residual(perturbed(n, N), 2));
      if (prev > 0.0) CHECK(testing::observed_order(prev, res) == doctest::Approx(2.0).epsilon(0.15));
      prev = res;
    }
  }
  CHECK_THROWS_AS(minkowski_residual(perturbed(2, 32), 3), Error);
}

TEST_CASE("variation of slices vanishes") {
  const auto g = Grid::build(GridKind::axisymmetric, 3, {64});
  const auto f = assemble(ScalarField(g, 0.8), 2);
  for (int l = -1; l <= 2; ++l) CHECK(std::abs(variation_rhs(f, l)) <= 1e-12);
}

TEST_CASE("variation check differentiates at second order") {
  for (double h : {0.1, 0.05}) {
    std::vector<VariationSample> s;
    for (double t = 0.0; t <= 1.0 + 1e-12; t += h) s.push_back({t, std::sin(t), std::cos(t), 1.0});
    const auto pts = variation_check(s);
    CHECK(pts.size() == s.size() - 2);
    for (const auto& p : pts) CHECK(std::abs(p.mismatch) <= h * h / 6.0 + 1e-12);
  }
  // Uneven spacing is still exact for quadratics.
  std::vector<VariationSample> q = {{0.0, 0.0, 0.0, 1.0}, {0.3, 0.09, 0.6, 1.0}, {0.4, 0.16, 0.8, 1.0}};
  CHECK(std::abs(variation_check(q).front().mismatch) <= 1e-14);
  CHECK_THROWS_AS(variation_check(std::span<const VariationSample>(q.data(), 2)), Error);
}

}  // TEST_SUITE
