#pragma once
// Polynomial approximations psi_n of the conditional expectation E[q | z] and
// the Bayesian updates built on them.
//
// Block k of an UpdateMap is a symmetric tensor kH over R^k with M rows, and
// psi_n(z) = sum_k kH z^{(x)k}. Because the tensor is stored once per sorted
// combination c, the monomial coefficient of z^c is multiplicity(c) * kH_c.

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "polyfilter/linalg.hpp"
#include "polyfilter/pce.hpp"
#include "polyfilter/polynomial_map.hpp"
#include "polyfilter/symmetric_tensor.hpp"

namespace polyfilter {

struct UpdateDiagnostics {
  double condition_number = 1.0;
  bool pseudo_inverse = false;
  /// E||q - psi_n(z)||^2 at the minimizer; NaN when not computed.
  double loss = std::numeric_limits<double>::quiet_NaN();
};

class UpdateMap {
 public:
  UpdateMap() = default;
  /// Zero map of the given degree from R^measurements to R^outputs.
  UpdateMap(int degree, std::size_t outputs, std::size_t measurements);

  int degree() const { return static_cast<int>(blocks_.size()) - 1; }
  std::size_t output_dim() const { return outputs_; }
  std::size_t measurement_dim() const { return measurements_; }

  const SymmetricTensor& block(int k) const { return blocks_.at(static_cast<std::size_t>(k)); }
  SymmetricTensor& block(int k) { return blocks_.at(static_cast<std::size_t>(k)); }
  const std::vector<SymmetricTensor>& blocks() const { return blocks_; }

  /// Frobenius norm of the full (unsymmetrized) k-th block.
  double block_norm(int k) const;

  /// psi_n(z).
  Eigen::VectorXd operator()(const Eigen::VectorXd& z) const;

  MonomialPolynomial to_monomials() const;
  /// Inverse of to_monomials(); `degree` may exceed the polynomial's degree.
  static UpdateMap from_monomials(const MonomialPolynomial& p, int degree);

  UpdateDiagnostics diagnostics;

 private:
  std::size_t outputs_ = 0;
  std::size_t measurements_ = 0;
  std::vector<SymmetricTensor> blocks_;
};

/// Moment system sum_k <z^(l+k)> kH = <q (x) z^l>, written over the monomial
/// basis {z^c : |c| <= n}. Combinations are ordered by size, then lexicographically.
struct HankelSystem {
  int degree = 0;
  std::size_t measurements = 0;
  std::size_t outputs = 0;
  std::vector<Combination> combos;
  Eigen::MatrixXd matrix;  // D x D, entries E[z^{c_i} z^{c_j}]
  Eigen::MatrixXd rhs;     // D x M, entries E[q_m z^{c_i}]
  /// E||q||^2, which turns the solution into the minimized loss.
  double q_second_moment = std::numeric_limits<double>::quiet_NaN();
};

struct GainResult {
  Eigen::MatrixXd gain;
  double condition_number = 1.0;
  bool pseudo_inverse = false;
};

/// K = c_qz c_zz^{-1}. Falls back to an eigenvalue-truncated pseudo-inverse
/// (flagged) when c_zz is singular relative to `tol`. Throws invalid_argument
/// when c_zz is not symmetric and InvalidCovariance when it is indefinite.
GainResult kalman_gain(const Eigen::MatrixXd& c_qz, const Eigen::MatrixXd& c_zz,
                       double tol = kDefaultPinvTolerance);

/// z = y + eps with eps ~ N(0, noise_cov) over fresh germs starting at
/// `germ_offset`. A zero noise covariance adds no germs.
PceVector add_measurement_noise(const PceVector& y, const Eigen::MatrixXd& noise_cov,
                                std::size_t germ_offset);

struct UpdateResult {
  PceVector posterior;
  /// The noisy predicted measurement z the map was fitted against.
  PceVector measurement;
  UpdateMap map;
};

/// Linear update q_a = q_f + K (z_hat - z), z = y_f + eps.
UpdateResult lbu_update(const PceVector& q_f, const PceVector& y_f, const Eigen::MatrixXd& noise_cov,
                        const Eigen::VectorXd& z_hat, double tol = kDefaultPinvTolerance);

HankelSystem build_hankel_system(const PceVector& z, const PceVector& q, int degree,
                                 const MomentBudget& budget = {});

/// Solves the Hankel system and unpacks it into blocks 0H..nH.
UpdateMap solve_update_map(const HankelSystem& sys, double tol = kDefaultPinvTolerance);

/// Quadratic filter from its closed form in covariance blocks, with the
/// pair-space inverse realized as a pseudo-inverse.
UpdateMap nlbu2_closed_form(const PceVector& z, const PceVector& q, double tol = kDefaultPinvTolerance);

inline constexpr int kDefaultMaxUpdateDegree = 3;

struct FitOptions {
  bool center = true;
  /// Whiten by the inverse covariance factor after centering.
  bool whiten = true;
  /// Permit degree > kDefaultMaxUpdateDegree.
  bool allow_high_degree = false;
  double tol = kDefaultPinvTolerance;
  MomentBudget budget{};
};

/// Degree-n filter fitted in centered (and whitened) coordinates, then
/// expanded back to the original measurement variables.
UpdateMap fit_update_map(const PceVector& z, const PceVector& q, int degree, const FitOptions& options = {});

/// psi_n(z) as an exact PCE.
PceVector expand_update_map(const UpdateMap& map, const PceVector& z, const MomentBudget& budget = {});

/// q_a = q_f + psi_n(z_hat) - psi_n(z).
PceVector apply_update_map(const UpdateMap& map, const PceVector& q_f, const PceVector& z,
                           const Eigen::VectorXd& z_hat, const MomentBudget& budget = {});

/// E||q - psi_n(z)||^2.
double update_loss(const UpdateMap& map, const PceVector& q, const PceVector& z,
                   const MomentBudget& budget = {});

/// E|X|^{2k+1} for X ~ N(0, sigma^2): sigma^{2k+1} 2^k k! sqrt(2/pi).
double half_normal_moment(int k, double sigma);

}  // namespace polyfilter
