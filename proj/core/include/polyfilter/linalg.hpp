#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace polyfilter {

/// A covariance-type matrix with an eigenvalue below -tol * largest.
struct InvalidCovariance : std::domain_error {
  using std::domain_error::domain_error;
};

/// Default relative eigenvalue cutoff for pseudo-inverses.
inline constexpr double kDefaultPinvTolerance = 1e-10;

enum class IndefinitePolicy {
  reject,    // throw InvalidCovariance
  truncate,  // drop the offending eigenvalues and flag the pseudo-inverse
};

struct SymmetricSolve {
  Eigen::MatrixXd solution;
  /// lambda_max / lambda_min of the system matrix (infinity when singular).
  double condition_number = 0.0;
  bool pseudo_inverse = false;
};

/// Throws std::invalid_argument if a is not square or not symmetric within
/// `rel_tol` * max|a_ij|.
void require_symmetric(const Eigen::MatrixXd& a, const char* what, double rel_tol = 1e-9);

/// Solves a x = rhs for symmetric positive (semi)definite a. Uses a Cholesky
/// factorization when every eigenvalue exceeds rel_tol * lambda_max, and an
/// eigenvalue-truncated pseudo-inverse otherwise.
SymmetricSolve solve_symmetric(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs,
                               double rel_tol = kDefaultPinvTolerance,
                               IndefinitePolicy policy = IndefinitePolicy::truncate);

/// Eigenvalue-truncated pseudo-inverse of a symmetric matrix.
Eigen::MatrixXd pseudo_inverse_symmetric(const Eigen::MatrixXd& a, double rel_tol = kDefaultPinvTolerance,
                                         bool* truncated = nullptr);

}  // namespace polyfilter
