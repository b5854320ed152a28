#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dsflow/grid.hpp"

namespace dsflow {

/// Zonal Fourier truncation for latlong grids. Row j keeps azimuthal
/// wavenumbers |m| <= cutoff(j), where the cutoff shrinks with sin(theta_j)
/// so that the shortest retained wavelength is no shorter (in sigma-length)
/// than the polar spacing. Rows near the equator are left untouched.
class PolarFilter {
 public:
  explicit PolarFilter(GridPtr grid);
  ~PolarFilter();
  PolarFilter(PolarFilter&&) noexcept;
  PolarFilter& operator=(PolarFilter&&) noexcept;
  PolarFilter(const PolarFilter&) = delete;
  PolarFilter& operator=(const PolarFilter&) = delete;

  int cutoff(int row) const { return cutoff_[row]; }
  bool filters(int row) const;

  /// Effective sigma-length of the azimuthal step seen by retained modes.
  double effective_spacing(int row) const { return spacing_[row]; }

  void apply(std::span<double> field) const;

 private:
  struct Plans;
  GridPtr grid_;
  std::vector<int> cutoff_;
  std::vector<double> spacing_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace dsflow
