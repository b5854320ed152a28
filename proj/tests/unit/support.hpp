#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "dsflow/symfun.hpp"

namespace testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Rejection sample of kappa in Gamma_k^+ from a box around the positive cone.
inline std::vector<double> random_in_cone(Rng& rng, int n, int k) {
  for (;;) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(rng, -1.0, 3.0);
    if (dsflow::cone_membership(dsflow::CurvatureVector(v)).in_cone(k)) return v;
  }
}

inline std::vector<double> random_positive(Rng& rng, int n) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, 0.05, 4.0);
  return v;
}

/// sigma_0..sigma_n by summing over all subsets.
inline std::vector<double> subset_sigma(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> sigma(n + 1, 0.0);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double prod = 1.0;
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        prod *= x[i];
        ++count;
      }
    }
    sigma[count] += prod;
  }
  return sigma;
}

/// Central difference of f along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, int i, double step) {
  const double x0 = x[i];
  x[i] = x0 + step;
  const double fp = f(x);
  x[i] = x0 - step;
  const double fm = f(x);
  return (fp - fm) / (2.0 * step);
}

inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace testing
