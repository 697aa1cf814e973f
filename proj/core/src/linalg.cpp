#include "polyfilter/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace polyfilter {

void require_symmetric(const Eigen::MatrixXd& a, const char* what, double rel_tol) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
  if (a.size() == 0) return;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > rel_tol * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric (asymmetry " +
                                std::to_string(asym / scale) + " relative)");
}

Eigen::MatrixXd pseudo_inverse_symmetric(const Eigen::MatrixXd& a, double rel_tol, bool* truncated) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()));
  const auto& lambda = eig.eigenvalues();
  const double top = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  bool dropped = false;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > rel_tol * top && top > 0.0)
      inv(i) = 1.0 / lambda(i);
    else
      dropped = true;
  }
  if (truncated) *truncated = dropped;
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

SymmetricSolve solve_symmetric(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs, double rel_tol,
                               IndefinitePolicy policy) {
  require_symmetric(a, "solve_symmetric");
  if (rhs.rows() != a.rows()) throw std::invalid_argument("solve_symmetric: rhs row count mismatch");
  SymmetricSolve out;
  if (a.rows() == 0) {
    out.solution = Eigen::MatrixXd::Zero(0, rhs.cols());
    out.condition_number = 1.0;
    return out;
  }
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());

  if (sym.rows() > 400) {
    // Large systems: skip the eigendecomposition when Cholesky succeeds and
    // the reciprocal condition estimate is comfortable.
    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    if (llt.info() == Eigen::Success && llt.rcond() > rel_tol) {
      out.solution = llt.solve(rhs);
      out.condition_number = 1.0 / llt.rcond();
      return out;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const auto& lambda = eig.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  const double bottom = lambda.minCoeff();
  if (policy == IndefinitePolicy::reject && bottom < -rel_tol * top)
    throw InvalidCovariance("solve_symmetric: negative eigenvalue " + std::to_string(bottom) +
                            " (largest " + std::to_string(top) + ")");
  if (top > 0.0 && bottom > rel_tol * top) {
    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    out.solution = llt.info() == Eigen::Success
                       ? Eigen::MatrixXd(llt.solve(rhs))
                       : Eigen::MatrixXd(eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() *
                                         eig.eigenvectors().transpose() * rhs);
    out.condition_number = top / bottom;
    return out;
  }
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (top > 0.0 && lambda(i) > rel_tol * top) inv(i) = 1.0 / lambda(i);
  out.solution = eig.eigenvectors() * inv.asDiagonal() * (eig.eigenvectors().transpose() * rhs);
  out.pseudo_inverse = true;
  out.condition_number = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace polyfilter
