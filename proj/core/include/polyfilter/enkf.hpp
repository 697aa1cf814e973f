#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "polyfilter/linalg.hpp"

namespace polyfilter {

/// N x M matrix of parameter samples plus the seed its perturbations draw from.
struct Ensemble {
  Eigen::MatrixXd members;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return members.rows(); }
  Eigen::VectorXd mean() const { return members.colwise().mean().transpose(); }
  /// Unbiased (1/(N-1)) sample covariance.
  Eigen::MatrixXd covariance() const;
};

struct EnkfResult {
  Ensemble posterior;
  Eigen::MatrixXd gain;
  bool pseudo_inverse = false;
  double condition_number = 1.0;
};

/// Perturbed-observation EnKF. Member i is corrected with z_hat + eta_i,
/// eta_i ~ N(0, noise_cov), drawn from substream ("enkf", i) of `seed`, so the
/// result does not depend on the order in which members are processed.
EnkfResult enkf_update(const Ensemble& ens, const Eigen::MatrixXd& y_members, const Eigen::MatrixXd& noise_cov,
                       const Eigen::VectorXd& z_hat, std::uint64_t seed, double tol = kDefaultPinvTolerance);

}  // namespace polyfilter
