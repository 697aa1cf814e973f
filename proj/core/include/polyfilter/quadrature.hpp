#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace polyfilter {

/// Nodes in germ space (one column per node) with positive weights summing
/// to one, i.e. a cubature for the standard Gaussian measure.
class QuadratureRule {
 public:
  QuadratureRule() = default;
  /// Throws if weights are not positive or do not sum to 1 within 1e-12.
  QuadratureRule(Eigen::MatrixXd nodes, Eigen::VectorXd weights);

  std::size_t dimension() const { return static_cast<std::size_t>(nodes_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Polynomial degree integrated exactly (per germ for tensor rules).
  int exactness() const { return exactness_; }
  void set_exactness(int degree) { exactness_ = degree; }

 private:
  Eigen::MatrixXd nodes_;
  Eigen::VectorXd weights_;
  int exactness_ = -1;
};

/// n-point Gauss-Hermite rule for the probabilists' weight exp(-t^2/2)/sqrt(2 pi),
/// via the Golub-Welsch eigenvalue problem. Exact for degree 2n-1.
QuadratureRule gauss_hermite_1d(int points);

/// Default cap on the node count of a full tensor rule.
inline constexpr std::size_t kDefaultMaxQuadratureNodes = std::size_t{1} << 20;

/// Full tensor product of `points`-point Gauss-Hermite rules in `dim` germs.
/// Throws std::length_error when points^dim exceeds `max_nodes`.
QuadratureRule tensor_gauss_hermite(std::size_t dim, int points,
                                    std::size_t max_nodes = kDefaultMaxQuadratureNodes);

/// Node count used for pseudo-spectral projection onto a basis of total
/// degree `basis_degree` when the integrand is a polynomial of degree
/// `integrand_degree`: the smallest n with 2n - 1 >= basis_degree + integrand_degree.
int projection_points(int basis_degree, int integrand_degree);

}  // namespace polyfilter
