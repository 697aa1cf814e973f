#include "polyfilter/pce.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "polyfilter/rng.hpp"

namespace polyfilter {

namespace {

Eigen::VectorXd factorial_norms(const IndexSet& basis) {
  Eigen::VectorXd n(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) n(static_cast<Eigen::Index>(j)) = factorial_norm(basis[j]);
  return n;
}

// H_alpha(theta) for all alpha in the basis.
void basis_values(const IndexSet& basis, std::span<const double> theta,
                  std::vector<std::vector<double>>& tables, Eigen::VectorXd& out) {
  const int p = basis.degree_bound();
  tables.resize(basis.dimension());
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    tables[k].resize(static_cast<std::size_t>(p) + 1);
    hermite1d_table(p, k < theta.size() ? theta[k] : 0.0, tables[k]);
  }
  out.resize(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    double v = 1.0;
    for (const auto& e : basis[j].entries()) v *= tables[e.position][e.exponent];
    out(static_cast<Eigen::Index>(j)) = v;
  }
}

}  // namespace

PceVector::PceVector(IndexSetPtr basis, Eigen::MatrixXd coeffs, std::string label)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)), label_(std::move(label)) {
  if (!basis_) throw std::invalid_argument("PceVector: null basis");
  if (static_cast<std::size_t>(coeffs_.cols()) != basis_->size())
    throw std::invalid_argument("PceVector: coefficient columns (" + std::to_string(coeffs_.cols()) +
                                ") do not match basis size (" + std::to_string(basis_->size()) + ")");
}

PceVector PceVector::constant(const Eigen::VectorXd& value, std::size_t germs) {
  auto basis = make_index_set(IndexSet(std::max<std::size_t>(germs, 1), {}));
  return PceVector(basis, Eigen::MatrixXd(value));
}

PceVector PceVector::gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
                              std::size_t germ_offset) {
  if (factor.rows() != mean.size()) throw std::invalid_argument("PceVector::gaussian: shape mismatch");
  const auto d = static_cast<std::size_t>(factor.cols());
  std::vector<MultiIndex> idx;
  for (std::size_t k = 0; k < d; ++k) idx.push_back(MultiIndex::unit(germ_offset + k));
  auto basis = make_index_set(IndexSet(std::max<std::size_t>(germ_offset + d, 1), idx));
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(mean.size(), static_cast<Eigen::Index>(basis->size()));
  c.col(0) = mean;
  for (std::size_t k = 0; k < d; ++k)
    c.col(static_cast<Eigen::Index>(*basis->find(idx[k]))) = factor.col(static_cast<Eigen::Index>(k));
  return PceVector(basis, std::move(c));
}

Eigen::VectorXd PceVector::coefficient(const MultiIndex& alpha) const {
  if (auto j = basis_->find(alpha)) return coeffs_.col(static_cast<Eigen::Index>(*j));
  return Eigen::VectorXd::Zero(coeffs_.rows());
}

Eigen::VectorXd PceVector::evaluate(std::span<const double> theta) const {
  if (theta.size() < basis_->dimension())
    throw std::invalid_argument("PceVector::evaluate: germ vector too short");
  std::vector<std::vector<double>> tables;
  Eigen::VectorXd h;
  basis_values(*basis_, theta, tables, h);
  return coeffs_ * h;
}

PceVector PceVector::on_basis(const IndexSetPtr& target) const {
  if (*target == *basis_) return PceVector(target, coeffs_, label_);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(coeffs_.rows(), static_cast<Eigen::Index>(target->size()));
  for (std::size_t j = 0; j < basis_->size(); ++j)
    if (auto t = target->find((*basis_)[j]))
      c.col(static_cast<Eigen::Index>(*t)) = coeffs_.col(static_cast<Eigen::Index>(j));
  return PceVector(target, std::move(c), label_);
}

PceVector PceVector::component(std::size_t m) const {
  return PceVector(basis_, coeffs_.row(static_cast<Eigen::Index>(m)), label_);
}

PceVector PceVector::affine(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) const {
  if (a.cols() != coeffs_.rows() || a.rows() != b.size())
    throw std::invalid_argument("PceVector::affine: shape mismatch");
  Eigen::MatrixXd c = a * coeffs_;
  c.col(0) += b;
  return PceVector(basis_, std::move(c));
}

std::pair<PceVector, PceVector> on_common_basis(const PceVector& a, const PceVector& b) {
  if (a.basis_ptr() == b.basis_ptr() || a.basis() == b.basis()) return {a, b.on_basis(a.basis_ptr())};
  auto common = make_index_set(a.basis().merged(b.basis()));
  return {a.on_basis(common), b.on_basis(common)};
}

PceVector stack(const PceVector& a, const PceVector& b) {
  auto [x, y] = on_common_basis(a, b);
  Eigen::MatrixXd c(x.coeffs().rows() + y.coeffs().rows(), x.coeffs().cols());
  c << x.coeffs(), y.coeffs();
  return PceVector(x.basis_ptr(), std::move(c));
}

PceVector operator+(const PceVector& a, const PceVector& b) {
  auto [x, y] = on_common_basis(a, b);
  if (x.dim() != y.dim()) throw std::invalid_argument("PceVector: dimension mismatch in +");
  return PceVector(x.basis_ptr(), x.coeffs() + y.coeffs());
}

PceVector operator-(const PceVector& a, const PceVector& b) {
  auto [x, y] = on_common_basis(a, b);
  if (x.dim() != y.dim()) throw std::invalid_argument("PceVector: dimension mismatch in -");
  return PceVector(x.basis_ptr(), x.coeffs() - y.coeffs());
}

PceVector operator*(double s, const PceVector& a) { return PceVector(a.basis_ptr(), s * a.coeffs(), a.label()); }

Eigen::VectorXd mean(const PceVector& q) { return q.mean(); }

Eigen::MatrixXd covariance(const PceVector& q1, const PceVector& q2) {
  auto [a, b] = on_common_basis(q1, q2);
  Eigen::VectorXd norms = factorial_norms(a.basis());
  norms(0) = 0.0;  // exclude the mean
  return a.coeffs() * norms.asDiagonal() * b.coeffs().transpose();
}

double second_moment(const PceVector& q) {
  const Eigen::VectorXd norms = factorial_norms(q.basis());
  return (q.coeffs().array().square().rowwise() * norms.transpose().array()).sum();
}

Eigen::MatrixXd sample(const PceVector& q, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample: n must be >= 1");
  Rng rng(seed);
  const std::size_t d = q.germ_dim();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q.dim()));
  std::vector<double> theta(d);
  std::vector<std::vector<double>> tables;
  Eigen::VectorXd h;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& t : theta) t = rng.gaussian();
    basis_values(q.basis(), theta, tables, h);
    out.row(static_cast<Eigen::Index>(i)) = (q.coeffs() * h).transpose();
  }
  return out;
}

PceVector project_values(const Eigen::MatrixXd& values, const IndexSetPtr& basis,
                         const QuadratureRule& rule) {
  if (rule.dimension() < basis->dimension())
    throw std::invalid_argument("project: rule has " + std::to_string(rule.dimension()) +
                                " germs but basis needs " + std::to_string(basis->dimension()));
  if (static_cast<std::size_t>(values.cols()) != rule.size())
    throw std::invalid_argument("project: value count does not match rule size");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(values.rows(), static_cast<Eigen::Index>(basis->size()));
  std::vector<std::vector<double>> tables;
  Eigen::VectorXd h;
  std::vector<double> theta(rule.dimension());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (std::size_t k = 0; k < theta.size(); ++k)
      theta[k] = rule.nodes()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    basis_values(*basis, theta, tables, h);
    c.noalias() += rule.weights()(static_cast<Eigen::Index>(i)) *
                   values.col(static_cast<Eigen::Index>(i)) * h.transpose();
  }
  const Eigen::VectorXd norms = factorial_norms(*basis);
  c = c * norms.cwiseInverse().asDiagonal();
  return PceVector(basis, std::move(c));
}

PceVector project(const GermFunction& f, const IndexSetPtr& basis, const QuadratureRule& rule) {
  if (rule.dimension() < basis->dimension())
    throw std::invalid_argument("project: rule has " + std::to_string(rule.dimension()) +
                                " germs but basis needs " + std::to_string(basis->dimension()));
  Eigen::MatrixXd values;
  std::vector<double> theta(rule.dimension());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (std::size_t k = 0; k < theta.size(); ++k)
      theta[k] = rule.nodes()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    Eigen::VectorXd v = f(theta);
    if (i == 0) values.resize(v.size(), static_cast<Eigen::Index>(rule.size()));
    if (v.size() != values.rows()) throw std::invalid_argument("project: callback changed output size");
    values.col(static_cast<Eigen::Index>(i)) = v;
  }
  return project_values(values, basis, rule);
}

PceVector regerm_gaussian(const PceVector& q, std::size_t max_germs, double rel_tol) {
  if (max_germs == 0) throw std::invalid_argument("regerm_gaussian: need at least one germ");
  const Eigen::MatrixXd c = covariance(q, q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (c + c.transpose()));
  const Eigen::VectorXd lambda = eig.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  const double top = std::max(lambda.size() ? lambda(0) : 0.0, 0.0);
  std::size_t keep = 0;
  while (keep < static_cast<std::size_t>(lambda.size()) && keep < max_germs &&
         lambda(static_cast<Eigen::Index>(keep)) > rel_tol * top && top > 0.0)
    ++keep;
  Eigen::MatrixXd factor(static_cast<Eigen::Index>(q.dim()), static_cast<Eigen::Index>(keep));
  for (std::size_t i = 0; i < keep; ++i) {
    Eigen::VectorXd v = vectors.col(static_cast<Eigen::Index>(i));
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0) v = -v;
    factor.col(static_cast<Eigen::Index>(i)) = std::sqrt(lambda(static_cast<Eigen::Index>(i))) * v;
  }
  auto out = PceVector::gaussian(q.mean(), factor);
  out.set_label(q.label());
  return out;
}

}  // namespace polyfilter
