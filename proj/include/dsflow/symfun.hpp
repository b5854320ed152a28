#pragma once

// Normalized elementary symmetric functions E_k = sigma_k / C(n,k) of
// principal curvatures, the Hessian quotient F = E_k / E_{k-1}, and Garding
// cone membership.

#include <optional>
#include <span>

#include <Eigen/Core>

namespace dsflow {

/// Largest hypersurface dimension supported by the fixed-capacity kernels.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Principal curvatures at one point. Entries must be finite, 2 <= n <= kMaxDim.
class CurvatureVector {
 public:
  CurvatureVector() = default;
  explicit CurvatureVector(std::span<const double> values);
  CurvatureVector(std::initializer_list<double> values);

  int dim() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return {values_.data(), static_cast<std::size_t>(values_.size())}; }

 private:
  Vec values_;
};

struct SymmetricValues {
  int n = 0;
  int k = 0;       // quotient index, 0 when only E was requested
  Vec E;           // E[0] = 1 ... E[n]
  Vec sigma;       // sigma[j] = C(n,j) * E[j]
  double F = 0.0;  // E_k / E_{k-1}
  Vec gradF;       // dF/dkappa_i

  /// E_j with the conventions E_j = 0 for j > n and j < 0.
  double e(int j) const { return (j < 0 || j > n) ? 0.0 : E[j]; }
};

struct ConeReport {
  int member_of = 0;  // largest k with E_1..E_k > 0
  bool positive_cone = false;

  bool in_cone(int k) const noexcept { return member_of >= k; }
};

/// Both Newton-inequality residuals; nullopt where a quotient is not defined.
struct NewtonResiduals {
  std::optional<double> lower;  // E_k/E_{k-1} - E_{k-1}/E_{k-2}
  std::optional<double> upper;  // E_{k+1}/E_k - E_k/E_{k-1}
};

double binomial(int n, int k);

/// Writes normalized E_0..E_m of the m values in x into out (size m+1),
/// using the convex-combination recurrence
/// E_j^{(m)} = ((m-j) E_j^{(m-1)} + j x_m E_{j-1}^{(m-1)}) / m.
void normalized_elementary(std::span<const double> x, std::span<double> out);

SymmetricValues elementary_all(const CurvatureVector& kappa);

ConeReport cone_membership(const CurvatureVector& kappa);

/// dE_k/dkappa_i = (k/n) E_{k-1}(kappa with entry i removed).
double elementary_derivative(const CurvatureVector& kappa, int k, int i);

/// E, sigma, F and dF/dkappa. Throws Error(domain) when kappa is outside Gamma_k^+.
SymmetricValues symmetric_values(const CurvatureVector& kappa, int k);

double quotient_F(const CurvatureVector& kappa, int k);
Vec gradient_F(const CurvatureVector& kappa, int k);

NewtonResiduals newton_residuals(const CurvatureVector& kappa, int k);

/// Right-hand sides of the closed-form sums of dF/dkappa_i and kappa_i^2 dF/dkappa_i.
double quotient_gradient_sum(const SymmetricValues& s);
double quotient_weighted_gradient_sum(const SymmetricValues& s);

}  // namespace dsflow
