#pragma once

#include <cstddef>
#include <map>

#include <Eigen/Dense>

#include "polyfilter/symmetric_tensor.hpp"

namespace polyfilter {

/// R^M-valued polynomial in R variables written in monomials,
/// p(z) = sum_c h_c prod_{i in c} z_i, keyed by sorted combinations c.
class MonomialPolynomial {
 public:
  MonomialPolynomial(std::size_t outputs, std::size_t variables)
      : outputs_(outputs), variables_(variables) {}

  std::size_t outputs() const { return outputs_; }
  std::size_t variables() const { return variables_; }
  const std::map<Combination, Eigen::VectorXd>& terms() const { return terms_; }

  void add(const Combination& c, const Eigen::VectorXd& coefficient);
  Eigen::VectorXd coefficient(const Combination& c) const;
  int degree() const;

  Eigen::VectorXd operator()(const Eigen::VectorXd& z) const;

  /// p(a x + b) as a polynomial in x, where a is variables() x n.
  MonomialPolynomial compose_affine(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) const;

 private:
  std::size_t outputs_;
  std::size_t variables_;
  std::map<Combination, Eigen::VectorXd> terms_;
};

}  // namespace polyfilter
