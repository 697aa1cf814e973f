#include "polyfilter/polynomial_map.hpp"

#include <algorithm>
#include <stdexcept>

namespace polyfilter {

void MonomialPolynomial::add(const Combination& c, const Eigen::VectorXd& coefficient) {
  if (static_cast<std::size_t>(coefficient.size()) != outputs_)
    throw std::invalid_argument("MonomialPolynomial::add: coefficient size mismatch");
  for (int i : c)
    if (i < 0 || static_cast<std::size_t>(i) >= variables_)
      throw std::out_of_range("MonomialPolynomial::add: variable out of range");
  Combination key = c;
  std::sort(key.begin(), key.end());
  auto [it, inserted] = terms_.try_emplace(key, coefficient);
  if (!inserted) it->second += coefficient;
}

Eigen::VectorXd MonomialPolynomial::coefficient(const Combination& c) const {
  Combination key = c;
  std::sort(key.begin(), key.end());
  auto it = terms_.find(key);
  return it == terms_.end() ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outputs_)) : it->second;
}

int MonomialPolynomial::degree() const {
  int d = 0;
  for (const auto& [c, h] : terms_) d = std::max(d, static_cast<int>(c.size()));
  return d;
}

Eigen::VectorXd MonomialPolynomial::operator()(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) != variables_)
    throw std::invalid_argument("MonomialPolynomial: argument dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(outputs_));
  for (const auto& [c, h] : terms_) {
    double mono = 1.0;
    for (int i : c) mono *= z(i);
    out += mono * h;
  }
  return out;
}

MonomialPolynomial MonomialPolynomial::compose_affine(const Eigen::MatrixXd& a,
                                                      const Eigen::VectorXd& b) const {
  if (static_cast<std::size_t>(a.rows()) != variables_ || b.size() != a.rows())
    throw std::invalid_argument("MonomialPolynomial::compose_affine: shape mismatch");
  const auto n = static_cast<std::size_t>(a.cols());
  MonomialPolynomial out(outputs_, n);
  for (const auto& [c, h] : terms_) {
    // Expand prod_{i in c} (b_i + sum_j a_ij x_j) as scalar monomials in x.
    std::map<Combination, double> expansion{{Combination{}, 1.0}};
    for (int i : c) {
      std::map<Combination, double> next;
      for (const auto& [mono, coef] : expansion) {
        if (b(i) != 0.0) next[mono] += coef * b(i);
        for (std::size_t j = 0; j < n; ++j) {
          const double aij = a(i, static_cast<Eigen::Index>(j));
          if (aij == 0.0) continue;
          Combination grown = mono;
          grown.insert(std::upper_bound(grown.begin(), grown.end(), static_cast<int>(j)),
                       static_cast<int>(j));
          next[grown] += coef * aij;
        }
      }
      expansion.swap(next);
    }
    for (const auto& [mono, coef] : expansion) out.add(mono, coef * h);
  }
  return out;
}

}  // namespace polyfilter
