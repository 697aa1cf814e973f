#include "polyfilter/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polyfilter {

namespace {

double sample_std(std::span<const double> s) {
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(s.size() - 1));
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("silverman_bandwidth: need at least two samples");
  return 1.06 * sample_std(samples) * std::pow(static_cast<double>(samples.size()), -0.2);
}

GridSpec padded_grid(std::span<const double> samples, std::size_t points, double pad) {
  if (samples.empty()) throw std::invalid_argument("padded_grid: no samples");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const double h = samples.size() > 1 ? silverman_bandwidth(samples) : 0.0;
  const double margin = h > 0.0 ? pad * h : 1.0;
  return {*lo - margin, *hi + margin, points};
}

KdeCurve kde(std::span<const double> samples, const GridSpec& grid, std::optional<double> bandwidth) {
  if (samples.size() < 2) throw std::invalid_argument("kde: need at least two samples");
  if (grid.points < 2 || !(grid.hi > grid.lo)) throw std::invalid_argument("kde: grid needs hi > lo and >= 2 points");
  KdeCurve curve;
  const double sigma = sample_std(samples);
  if (!(sigma > 0.0)) {
    curve.spike = true;
    curve.spike_location = samples[0];
    return curve;
  }
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
  curve.bandwidth = h;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double cutoff = 9.0 * h;  // exp(-40.5) is below double resolution of the sum
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  curve.x.resize(grid.points);
  curve.density.resize(grid.points);
  const double step = (grid.hi - grid.lo) / static_cast<double>(grid.points - 1);
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = grid.lo + step * static_cast<double>(i);
    auto first = std::lower_bound(sorted.begin(), sorted.end(), x - cutoff);
    auto last = std::upper_bound(first, sorted.end(), x + cutoff);
    double s = 0.0;
    for (auto it = first; it != last; ++it) {
      const double u = (x - *it) / h;
      s += std::exp(-0.5 * u * u);
    }
    curve.x[i] = x;
    curve.density[i] = s * norm;
  }
  return curve;
}

double integral(const KdeCurve& curve) { return curve.spike ? 1.0 : trapezoid(curve.x, curve.density); }

double l1_distance(const KdeCurve& a, const KdeCurve& b) {
  if (a.spike || b.spike) throw std::invalid_argument("l1_distance: spike curves have no density");
  if (a.x.size() != b.x.size() || (!a.x.empty() && (a.x.front() != b.x.front() || a.x.back() != b.x.back())))
    throw std::invalid_argument("l1_distance: curves are on different grids");
  std::vector<double> diff(a.x.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(a.density[i] - b.density[i]);
  return trapezoid(a.x, diff);
}

}  // namespace polyfilter
