#include "dsflow/polar_filter.hpp"

#include <algorithm>
#include <cmath>

#include <fftw3.h>

#include "dsflow/errors.hpp"

namespace dsflow {

struct PolarFilter::Plans {
  int n_phi = 0;
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plans(int np) : n_phi(np) {
    real = fftw_alloc_real(static_cast<std::size_t>(np));
    spectrum = fftw_alloc_complex(static_cast<std::size_t>(np / 2 + 1));
    forward = fftw_plan_dft_r2c_1d(np, real, spectrum, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(np, spectrum, real, FFTW_ESTIMATE);
  }
  ~Plans() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spectrum);
  }
};

PolarFilter::PolarFilter(GridPtr grid) : grid_(std::move(grid)) {
  const Grid& g = *grid_;
  cutoff_.assign(g.n_theta(), 0);
  spacing_.assign(g.n_theta(), 0.0);
  if (g.kind() != GridKind::latlong) return;
  const int nyquist = g.n_phi() / 2;
  for (int j = 0; j < g.n_theta(); ++j) {
    const double s = std::sin(g.theta_at(j));
    const double ratio = s * g.dphi() / g.dtheta();
    const int cut = std::clamp(static_cast<int>(std::floor(nyquist * ratio)), 1, nyquist);
    cutoff_[j] = cut;
    spacing_[j] = s * g.dphi() / std::sin(0.5 * cut * g.dphi());
  }
  plans_ = std::make_unique<Plans>(g.n_phi());
}

PolarFilter::~PolarFilter() = default;
PolarFilter::PolarFilter(PolarFilter&&) noexcept = default;
PolarFilter& PolarFilter::operator=(PolarFilter&&) noexcept = default;

bool PolarFilter::filters(int row) const {
  return grid_->kind() == GridKind::latlong && cutoff_[row] < grid_->n_phi() / 2;
}

void PolarFilter::apply(std::span<double> field) const {
  const Grid& g = *grid_;
  if (g.kind() != GridKind::latlong) return;
  if (field.size() != g.size()) throw Error(ErrorKind::invalid_argument, "filter field size mismatch");
  const int np = g.n_phi();
  for (int j = 0; j < g.n_theta(); ++j) {
    if (!filters(j)) continue;
    double* row = field.data() + g.index(j, 0);
    std::copy(row, row + np, plans_->real);
    fftw_execute(plans_->forward);
    for (int m = cutoff_[j] + 1; m <= np / 2; ++m) {
      plans_->spectrum[m][0] = 0.0;
      plans_->spectrum[m][1] = 0.0;
    }
    fftw_execute(plans_->backward);
    for (int m = 0; m < np; ++m) row[m] = plans_->real[m] / np;
  }
}

}  // namespace dsflow
