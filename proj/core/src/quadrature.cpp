#include "polyfilter/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polyfilter {

QuadratureRule::QuadratureRule(Eigen::MatrixXd nodes, Eigen::VectorXd weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.cols() != weights_.size())
    throw std::invalid_argument("QuadratureRule: node/weight count mismatch");
  if ((weights_.array() <= 0.0).any())
    throw std::invalid_argument("QuadratureRule: weights must be positive");
  if (std::abs(weights_.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("QuadratureRule: weights must sum to 1");
}

QuadratureRule gauss_hermite_1d(int points) {
  if (points < 1) throw std::invalid_argument("gauss_hermite_1d: need at least one point");
  // Jacobi matrix of the monic probabilists' Hermite recurrence
  // p_{k+1} = t p_k - k p_{k-1}: zero diagonal, off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Eigen::MatrixXd nodes(1, points);
  Eigen::VectorXd weights(points);
  for (int i = 0; i < points; ++i) {
    nodes(0, i) = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    weights(i) = v * v;
  }
  // Symmetrize: nodes come in +- pairs and the rule must integrate odd
  // functions to exactly zero.
  for (int i = 0; i < points / 2; ++i) {
    const int j = points - 1 - i;
    const double t = 0.5 * (nodes(0, j) - nodes(0, i));
    const double w = 0.5 * (weights(i) + weights(j));
    nodes(0, i) = -t;
    nodes(0, j) = t;
    weights(i) = weights(j) = w;
  }
  if (points % 2 == 1) nodes(0, points / 2) = 0.0;
  weights /= weights.sum();
  QuadratureRule rule(std::move(nodes), std::move(weights));
  rule.set_exactness(2 * points - 1);
  return rule;
}

QuadratureRule tensor_gauss_hermite(std::size_t dim, int points, std::size_t max_nodes) {
  if (dim == 0) throw std::invalid_argument("tensor_gauss_hermite: dimension must be positive");
  double count = std::pow(static_cast<double>(points), static_cast<double>(dim));
  if (count > static_cast<double>(max_nodes))
    throw std::length_error("tensor_gauss_hermite: " + std::to_string(points) + "^" +
                            std::to_string(dim) + " nodes exceeds the budget of " +
                            std::to_string(max_nodes));
  const auto base = gauss_hermite_1d(points);
  const auto n = static_cast<Eigen::Index>(count + 0.5);
  Eigen::MatrixXd nodes(static_cast<Eigen::Index>(dim), n);
  Eigen::VectorXd weights(n);
  std::vector<int> digit(dim, 0);
  for (Eigen::Index j = 0; j < n; ++j) {
    double w = 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
      nodes(static_cast<Eigen::Index>(k), j) = base.nodes()(0, digit[k]);
      w *= base.weights()(digit[k]);
    }
    weights(j) = w;
    for (std::size_t k = 0; k < dim; ++k) {
      if (++digit[k] < points) break;
      digit[k] = 0;
    }
  }
  weights /= weights.sum();
  QuadratureRule rule(std::move(nodes), std::move(weights));
  rule.set_exactness(base.exactness());
  return rule;
}

int projection_points(int basis_degree, int integrand_degree) {
  const int total = basis_degree + integrand_degree;
  return std::max(1, (total + 2) / 2);
}

}  // namespace polyfilter
