#pragma once

// Restrictions of cubic polynomials on R^3 to the unit sphere, with exact
// covariant gradient and Hessian: Hess f(X, Y) = D^2 F(X, Y) - <grad F, x> <X, Y>.

#include <array>
#include <cmath>
#include <random>

namespace testing {

struct Cubic {
  // c[a][b][c] multiplies x^a y^b z^c, a + b + c <= 3.
  double c[4][4][4] = {};

  static Cubic random(std::mt19937_64& rng, bool zonal = false) {
    Cubic p;
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int a = 0; a <= 3; ++a)
      for (int b = 0; a + b <= 3; ++b)
        for (int d = 0; a + b + d <= 3; ++d)
          if (!zonal || (a == 0 && b == 0)) p.c[a][b][d] = u(rng);
    return p;
  }

  double value(const std::array<double, 3>& x) const {
    double s = 0.0;
    for (int a = 0; a <= 3; ++a)
      for (int b = 0; a + b <= 3; ++b)
        for (int d = 0; a + b + d <= 3; ++d)
          s += c[a][b][d] * std::pow(x[0], a) * std::pow(x[1], b) * std::pow(x[2], d);
    return s;
  }

  std::array<double, 3> gradient(const std::array<double, 3>& x) const {
    std::array<double, 3> g{};
    for (int a = 0; a <= 3; ++a)
      for (int b = 0; a + b <= 3; ++b)
        for (int d = 0; a + b + d <= 3; ++d) {
          const double k = c[a][b][d];
          if (a) g[0] += k * a * std::pow(x[0], a - 1) * std::pow(x[1], b) * std::pow(x[2], d);
          if (b) g[1] += k * b * std::pow(x[0], a) * std::pow(x[1], b - 1) * std::pow(x[2], d);
          if (d) g[2] += k * d * std::pow(x[0], a) * std::pow(x[1], b) * std::pow(x[2], d - 1);
        }
    return g;
  }

  std::array<std::array<double, 3>, 3> hessian(const std::array<double, 3>& x) const {
    std::array<std::array<double, 3>, 3> h{};
    const int e[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int a = 0; a <= 3; ++a)
      for (int b = 0; a + b <= 3; ++b)
        for (int d = 0; a + b + d <= 3; ++d) {
          const int pw[3] = {a, b, d};
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              int q[3] = {pw[0], pw[1], pw[2]};
              double factor = c[a][b][d];
              factor *= q[i];
              q[i] -= e[i][i];
              if (q[i] < 0) continue;
              factor *= q[j];
              q[j] -= e[j][j];
              if (q[j] < 0 || factor == 0.0) continue;
              h[i][j] += factor * std::pow(x[0], q[0]) * std::pow(x[1], q[1]) * std::pow(x[2], q[2]);
            }
        }
    return h;
  }
};

struct SphereFrame {
  std::array<double, 3> x, e_theta, e_phi;

  SphereFrame(double theta, double phi) {
    const double st = std::sin(theta), ct = std::cos(theta), sp = std::sin(phi), cp = std::cos(phi);
    x = {st * cp, st * sp, ct};
    e_theta = {ct * cp, ct * sp, -st};
    e_phi = {-sp, cp, 0.0};
  }
};

inline double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/// Orthonormal-frame gradient (theta, phi) and Hessian of the restriction.
struct FrameDerivatives {
  std::array<double, 2> grad;
  std::array<std::array<double, 2>, 2> hess;
};

inline FrameDerivatives frame_derivatives(const Cubic& p, double theta, double phi) {
  const SphereFrame f(theta, phi);
  const auto g = p.gradient(f.x);
  const auto H = p.hessian(f.x);
  const double radial = dot(g, f.x);
  const std::array<std::array<double, 3>, 2> e = {f.e_theta, f.e_phi};
  FrameDerivatives out;
  for (int i = 0; i < 2; ++i) {
    out.grad[i] = dot(g, e[i]);
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += H[a][b] * e[i][a] * e[j][b];
      out.hess[i][j] = s - (i == j ? radial : 0.0);
    }
  }
  return out;
}

}  // namespace testing
