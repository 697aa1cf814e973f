#include "polyfilter/enkf.hpp"

#include <stdexcept>

#include "polyfilter/rng.hpp"

namespace polyfilter {

Eigen::MatrixXd Ensemble::covariance() const {
  if (members.rows() < 2) throw std::invalid_argument("Ensemble: need at least two members");
  const Eigen::MatrixXd dev = members.rowwise() - members.colwise().mean();
  return dev.transpose() * dev / static_cast<double>(members.rows() - 1);
}

EnkfResult enkf_update(const Ensemble& ens, const Eigen::MatrixXd& y_members, const Eigen::MatrixXd& noise_cov,
                       const Eigen::VectorXd& z_hat, std::uint64_t seed, double tol) {
  const Eigen::Index n = ens.members.rows();
  if (n < 2) throw std::invalid_argument("enkf_update: need at least two members");
  if (y_members.rows() != n) throw std::invalid_argument("enkf_update: member counts differ");
  const Eigen::Index r = y_members.cols();
  if (noise_cov.rows() != r || noise_cov.cols() != r || z_hat.size() != r)
    throw std::invalid_argument("enkf_update: measurement dimensions differ");
  require_symmetric(noise_cov, "enkf_update");

  const Eigen::MatrixXd dq = ens.members.rowwise() - ens.members.colwise().mean();
  const Eigen::MatrixXd dy = y_members.rowwise() - y_members.colwise().mean();
  const double scale = 1.0 / static_cast<double>(n - 1);
  const Eigen::MatrixXd c_qy = scale * dq.transpose() * dy;
  Eigen::MatrixXd c_zz = scale * dy.transpose() * dy + noise_cov;
  c_zz = 0.5 * (c_zz + c_zz.transpose());
  const auto solve = solve_symmetric(c_zz, c_qy.transpose(), tol, IndefinitePolicy::reject);

  EnkfResult out;
  out.gain = solve.solution.transpose();
  out.pseudo_inverse = solve.pseudo_inverse;
  out.condition_number = solve.condition_number;

  // Factor for the perturbations; a zero covariance perturbs nothing.
  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(r, r);
  if (!noise_cov.isZero(0.0)) {
    Eigen::LLT<Eigen::MatrixXd> llt(noise_cov);
    if (llt.info() == Eigen::Success) {
      factor = llt.matrixL();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(noise_cov);
      factor = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
  }
  out.posterior.seed = seed;
  out.posterior.members = ens.members;
  Eigen::VectorXd eta(r);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng(seed, "enkf", static_cast<std::uint64_t>(i));
    for (Eigen::Index j = 0; j < r; ++j) eta(j) = rng.gaussian();
    const Eigen::VectorXd innovation = z_hat + factor * eta - y_members.row(i).transpose();
    out.posterior.members.row(i) += (out.gain * innovation).transpose();
  }
  return out;
}

}  // namespace polyfilter
