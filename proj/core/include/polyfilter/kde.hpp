#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace polyfilter {

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 512;
};

struct KdeCurve {
  std::vector<double> x;
  std::vector<double> density;
  double bandwidth = 0.0;
  /// Set when the samples have zero spread; x and density are then empty
  /// and all mass sits at spike_location.
  bool spike = false;
  double spike_location = 0.0;
};

/// 1.06 * sigma * n^{-1/5} with the unbiased sample deviation.
double silverman_bandwidth(std::span<const double> samples);

/// Sample range padded by `pad` Silverman bandwidths on each side.
GridSpec padded_grid(std::span<const double> samples, std::size_t points = 512, double pad = 5.0);

/// Gaussian-kernel density estimate on a uniform grid. Throws
/// std::invalid_argument for fewer than two samples or a bad grid.
KdeCurve kde(std::span<const double> samples, const GridSpec& grid, std::optional<double> bandwidth = {});

/// Trapezoidal integral of the density over its grid.
double integral(const KdeCurve& curve);

/// Trapezoidal integral of |a - b|; both curves must share one grid.
double l1_distance(const KdeCurve& a, const KdeCurve& b);

}  // namespace polyfilter
