#pragma once

// Vector-valued random variables as truncated Hermite chaos expansions:
// q(theta) = sum_{alpha in J} q^alpha H_alpha(theta), q^alpha in R^M.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "polyfilter/index_set.hpp"
#include "polyfilter/quadrature.hpp"
#include "polyfilter/symmetric_tensor.hpp"

namespace polyfilter {

class PceVector {
 public:
  PceVector() = default;
  /// coeffs is M x J; column j belongs to basis[j]. Throws on a column mismatch.
  PceVector(IndexSetPtr basis, Eigen::MatrixXd coeffs, std::string label = {});

  /// Deterministic vector on the degree-0 basis over `germs` variables.
  static PceVector constant(const Eigen::VectorXd& value, std::size_t germs = 1);
  /// mean + factor * theta, with factor M x d and germs offset..offset+d-1.
  static PceVector gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                            std::size_t germ_offset = 0);

  const IndexSet& basis() const { return *basis_; }
  const IndexSetPtr& basis_ptr() const { return basis_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  Eigen::MatrixXd& coeffs() { return coeffs_; }
  std::size_t dim() const { return static_cast<std::size_t>(coeffs_.rows()); }
  std::size_t terms() const { return static_cast<std::size_t>(coeffs_.cols()); }
  std::size_t germ_dim() const { return basis_->dimension(); }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  /// Coefficient vector of `alpha`, zero if alpha is not in the basis.
  Eigen::VectorXd coefficient(const MultiIndex& alpha) const;
  Eigen::VectorXd mean() const { return coeffs_.col(0); }
  /// sum_alpha q^alpha H_alpha(theta); theta may be longer than germ_dim().
  Eigen::VectorXd evaluate(std::span<const double> theta) const;

  /// Re-expresses on `target`. Coefficients of indices missing from the
  /// target are dropped, which is the orthogonal projection P_J.
  PceVector on_basis(const IndexSetPtr& target) const;
  /// Single component m as a scalar PCE.
  PceVector component(std::size_t m) const;
  /// A q + b on the same basis.
  PceVector affine(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) const;

  friend PceVector operator+(const PceVector& a, const PceVector& b);
  friend PceVector operator-(const PceVector& a, const PceVector& b);
  friend PceVector operator*(double s, const PceVector& a);

  /// Equal bases (by value) and bitwise equal coefficients.
  friend bool operator==(const PceVector& a, const PceVector& b) {
    return *a.basis_ == *b.basis_ && a.coeffs_ == b.coeffs_;
  }

 private:
  IndexSetPtr basis_;
  Eigen::MatrixXd coeffs_;
  std::string label_;
};

/// Both arguments re-expressed on the union of their bases.
std::pair<PceVector, PceVector> on_common_basis(const PceVector& a, const PceVector& b);
/// Stacks components of a and b into one (Ma + Mb)-valued PCE.
PceVector stack(const PceVector& a, const PceVector& b);

Eigen::VectorXd mean(const PceVector& q);
/// C = sum_{alpha != 0} alpha! q1^alpha (q2^alpha)^T, size M1 x M2.
Eigen::MatrixXd covariance(const PceVector& q1, const PceVector& q2);
/// E ||q||^2 = sum_alpha alpha! |q^alpha|^2.
double second_moment(const PceVector& q);

struct MomentBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Limits on analytic moment assembly. Beyond them the caller should
/// integrate with a quadrature rule through project() instead.
struct MomentBudget {
  int max_order = 6;
  std::size_t max_terms = 500;
  /// Cap on order * degree_bound, the degree of the largest product formed.
  int max_product_degree = 48;

  void check(const PceVector& z, int order) const;
};

/// <z^{(x)k}>, symmetrized. k = 0 yields the scalar 1.
SymmetricTensor raw_moment_tensor(const PceVector& z, int k, const MomentBudget& budget = {});
/// <q (x) Sym(z^{(x)k})> as an M-row symmetric tensor over R^k.
SymmetricTensor cross_moment(const PceVector& q, const PceVector& z, int k,
                             const MomentBudget& budget = {});

/// n x M matrix of realizations drawn at theta ~ N(0, I) from `seed`.
Eigen::MatrixXd sample(const PceVector& q, std::size_t n, std::uint64_t seed);

using GermFunction = std::function<Eigen::VectorXd(std::span<const double> theta)>;

/// Pseudo-spectral projection q^alpha = (1/alpha!) sum_w w f(node) H_alpha(node).
/// Throws std::invalid_argument if the rule is over fewer germs than the basis.
PceVector project(const GermFunction& f, const IndexSetPtr& basis, const QuadratureRule& rule);
/// Same, from already evaluated node values (one column per rule node).
PceVector project_values(const Eigen::MatrixXd& values, const IndexSetPtr& basis,
                         const QuadratureRule& rule);

/// Re-parameterizes q by mean + sum_i sqrt(lambda_i) v_i theta_i over at most
/// `max_germs` fresh germs, keeping the leading covariance eigenpairs above
/// `rel_tol` * lambda_max. Mean and (retained) covariance are preserved;
/// higher moments are not.
PceVector regerm_gaussian(const PceVector& q, std::size_t max_germs, double rel_tol = 1e-12);

}  // namespace polyfilter
