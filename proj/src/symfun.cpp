#include "dsflow/symfun.hpp"

#include <array>
#include <cmath>
#include <string>

#include "dsflow/errors.hpp"

namespace dsflow {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::null_degeneration: return "null degeneration";
    case ErrorKind::near_null: return "near-null hypersurface";
    case ErrorKind::convexity_lost: return "k-convexity lost";
    case ErrorKind::numerical: return "numerical failure";
    case ErrorKind::stiffness_collapse: return "stiffness collapse";
    case ErrorKind::monitor_violation: return "monitor violation";
  }
  return "unknown";
}

namespace {

void check_values(std::span<const double> values) {
  if (values.size() < 2 || values.size() > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorKind::invalid_argument,
                "curvature vector dimension must be in [2, " + std::to_string(kMaxDim) + "]");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::invalid_argument, "curvature vector has a non-finite entry");
    }
  }
}

void check_index(int n, int k) {
  if (k < 1 || k > n) {
    throw Error(ErrorKind::invalid_argument,
                "quotient index k=" + std::to_string(k) + " outside [1, n=" + std::to_string(n) + "]");
  }
}

// E_{j} of kappa with entry `skip` removed, for all j = 0..n-1.
void reduced_elementary(const CurvatureVector& kappa, int skip, std::span<double> out) {
  std::array<double, kMaxDim> rest{};
  int m = 0;
  for (int i = 0; i < kappa.dim(); ++i) {
    if (i != skip) rest[m++] = kappa[i];
  }
  normalized_elementary(std::span<const double>(rest.data(), m), out.first(m + 1));
}

}  // namespace

CurvatureVector::CurvatureVector(std::span<const double> values) {
  check_values(values);
  values_.resize(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) values_[static_cast<Eigen::Index>(i)] = values[i];
}

CurvatureVector::CurvatureVector(std::initializer_list<double> values)
    : CurvatureVector(std::span<const double>(values.begin(), values.size())) {}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return std::round(c);
}

void normalized_elementary(std::span<const double> x, std::span<double> out) {
  const int len = static_cast<int>(x.size());
  out[0] = 1.0;
  for (int j = 1; j <= len; ++j) out[j] = 0.0;
  for (int m = 1; m <= len; ++m) {
    const double xm = x[m - 1];
    for (int j = m; j >= 1; --j) {
      out[j] = ((m - j) * out[j] + j * xm * out[j - 1]) / m;
    }
  }
}

SymmetricValues elementary_all(const CurvatureVector& kappa) {
  SymmetricValues s;
  s.n = kappa.dim();
  s.E.resize(s.n + 1);
  s.sigma.resize(s.n + 1);
  normalized_elementary(kappa.values(), std::span<double>(s.E.data(), s.n + 1));
  for (int j = 0; j <= s.n; ++j) s.sigma[j] = binomial(s.n, j) * s.E[j];
  s.F = std::nan("");
  return s;
}

ConeReport cone_membership(const CurvatureVector& kappa) {
  const SymmetricValues s = elementary_all(kappa);
  ConeReport report;
  while (report.member_of < s.n && s.E[report.member_of + 1] > 0.0) ++report.member_of;
  report.positive_cone = true;
  for (double v : kappa.values()) report.positive_cone = report.positive_cone && v > 0.0;
  return report;
}

double elementary_derivative(const CurvatureVector& kappa, int k, int i) {
  const int n = kappa.dim();
  if (k < 1 || k > n) return 0.0;
  std::array<double, kMaxDim> reduced{};
  reduced_elementary(kappa, i, reduced);
  return static_cast<double>(k) / n * reduced[k - 1];
}

SymmetricValues symmetric_values(const CurvatureVector& kappa, int k) {
  SymmetricValues s = elementary_all(kappa);
  check_index(s.n, k);
  for (int l = 1; l <= k; ++l) {
    if (!(s.E[l] > 0.0)) {
      throw Error(ErrorKind::domain, "curvature vector outside Gamma_" + std::to_string(k) +
                                         "^+ (E_" + std::to_string(l) + " <= 0)");
    }
  }
  s.k = k;
  const double ek = s.E[k];
  const double ekm1 = s.E[k - 1];
  s.F = ek / ekm1;
  s.gradF.resize(s.n);
  std::array<double, kMaxDim> reduced{};
  for (int i = 0; i < s.n; ++i) {
    reduced_elementary(kappa, i, reduced);
    const double d_ek = static_cast<double>(k) / s.n * reduced[k - 1];
    const double d_ekm1 = k >= 2 ? static_cast<double>(k - 1) / s.n * reduced[k - 2] : 0.0;
    s.gradF[i] = (d_ek * ekm1 - ek * d_ekm1) / (ekm1 * ekm1);
  }
  return s;
}

double quotient_F(const CurvatureVector& kappa, int k) { return symmetric_values(kappa, k).F; }

Vec gradient_F(const CurvatureVector& kappa, int k) { return symmetric_values(kappa, k).gradF; }

NewtonResiduals newton_residuals(const CurvatureVector& kappa, int k) {
  const SymmetricValues s = elementary_all(kappa);
  check_index(s.n, k);
  auto ratio = [&](int top) -> std::optional<double> {
    // E_top / E_{top-1}
    if (top < 1 || top > s.n) return std::nullopt;
    const double den = s.E[top - 1];
    if (!(den > 0.0)) return std::nullopt;
    return s.E[top] / den;
  };
  NewtonResiduals out;
  const auto q_km1 = ratio(k - 1);
  const auto q_k = ratio(k);
  const auto q_kp1 = ratio(k + 1);
  if (q_k && q_km1) out.lower = *q_k - *q_km1;
  if (q_kp1 && q_k) out.upper = *q_kp1 - *q_k;
  return out;
}

double quotient_gradient_sum(const SymmetricValues& s) {
  const int k = s.k;
  const double ekm1 = s.e(k - 1);
  return k - (k - 1) * s.e(k) * s.e(k - 2) / (ekm1 * ekm1);
}

double quotient_weighted_gradient_sum(const SymmetricValues& s) {
  const int k = s.k;
  const double ekm1 = s.e(k - 1);
  return (s.n - k + 1) * s.e(k) * s.e(k) / (ekm1 * ekm1) - (s.n - k) * s.e(k + 1) / ekm1;
}

}  // namespace dsflow
