#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyfilter/config.hpp"
#include "polyfilter/enkf.hpp"
#include "polyfilter/pce.hpp"

namespace polyfilter {

struct CycleRow {
  int cycle = 0;
  /// Model time of the update (days for Lorenz-84, the cycle index otherwise).
  double time = 0.0;
  /// Covariance trace before the previous cycle's propagation, i.e. right
  /// after the previous update (the prior for cycle 1).
  double previous_trace = 0.0;
  double forecast_trace = 0.0;
  double posterior_trace = 0.0;
  double loss = 0.0;
  double condition_number = 0.0;
  bool pseudo_inverse = false;
  double rms_error = 0.0;
  std::size_t germ_dim = 0;
  Eigen::VectorXd posterior_mean;
};

struct RunReport {
  std::string id;
  std::vector<std::string> variables;
  std::vector<CycleRow> rows;
  std::vector<std::filesystem::path> files;
  /// PCE filters: forecast and posterior per cycle (empty for EnKF).
  std::vector<PceVector> forecasts;
  std::vector<PceVector> posteriors;
  /// Truth state or parameter at each update.
  std::vector<Eigen::VectorXd> truths;
  std::optional<Ensemble> final_ensemble;
};

/// The documented non-Gaussian truth of the scalar identity experiment:
/// 1 + 0.3 H_1 + 0.1 H_2 + 0.2 H_3 in one germ, a skewed two-humped density.
PceVector bimodal_truth();

/// Runs the experiment and, when cfg.output_dir is non-empty, writes
/// report.csv, diagnostics.csv, quantiles.csv, pdf_<c>.csv and posterior_<c>.pce.
/// Failures inside a cycle are rethrown with the cycle index.
RunReport run_experiment(const ExperimentConfig& cfg);

/// ||mean(q) - truth|| / sqrt(M).
double rms_error(const PceVector& q, const Eigen::VectorXd& truth);

/// Empirical quantiles (linear interpolation between order statistics).
double empirical_quantile(std::vector<double> values, double p);

/// Per time point, an M x probs matrix of seeded-sample quantiles.
std::vector<Eigen::MatrixXd> quantile_track(const std::vector<PceVector>& states, std::span<const double> probs,
                                            std::size_t samples, std::uint64_t seed);

/// Total of per-component L1 distances between the KDEs of two PCEs, with
/// both sampled from the same seed and evaluated on a shared grid.
double kde_l1_distance(const PceVector& a, const PceVector& b, std::size_t samples, std::size_t points,
                       std::uint64_t seed);

}  // namespace polyfilter
