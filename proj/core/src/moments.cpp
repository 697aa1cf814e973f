#include "polyfilter/moments.hpp"

#include <string>

namespace polyfilter {

void MomentBudget::check(const PceVector& z, int order) const {
  if (order > max_order)
    throw MomentBudgetExceeded("analytic moment of order " + std::to_string(order) +
                               " exceeds the budget of " + std::to_string(max_order) +
                               "; integrate with a quadrature rule instead");
  if (z.terms() > max_terms)
    throw MomentBudgetExceeded("PCE with " + std::to_string(z.terms()) +
                               " terms exceeds the analytic moment budget of " +
                               std::to_string(max_terms) + "; integrate with a quadrature rule instead");
  if (order * z.basis().degree_bound() > max_product_degree)
    throw MomentBudgetExceeded("moment order times degree bound exceeds " +
                               std::to_string(max_product_degree));
}

MomentEngine::MomentEngine(const PceVector& z, const MomentBudget& budget)
    : z_(z), budget_(budget) {
  if (z_.terms() > budget_.max_terms) budget_.check(z_, 0);
  components_.reserve(z_.dim());
  for (std::size_t i = 0; i < z_.dim(); ++i) components_.push_back(to_sparse(z_, i));
  SparseChaos one;
  one.emplace(MultiIndex{}, 1.0);
  products_.emplace(Combination{}, std::move(one));
}

void MomentEngine::check_order(int order) const { budget_.check(z_, order); }

const SparseChaos& MomentEngine::product(const Combination& c) {
  if (auto it = products_.find(c); it != products_.end()) return it->second;
  check_order(static_cast<int>(c.size()));
  for (int i : c)
    if (i < 0 || static_cast<std::size_t>(i) >= z_.dim())
      throw std::out_of_range("MomentEngine: component index out of range");
  Combination head(c.begin(), c.end() - 1);
  const SparseChaos& prefix = product(head);
  auto result = multiply(prefix, components_[static_cast<std::size_t>(c.back())]);
  return products_.emplace(c, std::move(result)).first->second;
}

double MomentEngine::raw(const Combination& c) {
  if (auto it = raw_cache_.find(c); it != raw_cache_.end()) return it->second;
  check_order(static_cast<int>(c.size()));
  const std::size_t half = (c.size() + 1) / 2;
  Combination left(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
  Combination right(c.begin() + static_cast<std::ptrdiff_t>(half), c.end());
  const double v = inner(product(left), product(right));
  raw_cache_.emplace(c, v);
  return v;
}

double MomentEngine::cross(const SparseChaos& q_row, const Combination& c) {
  check_order(static_cast<int>(c.size()) + 1);
  return inner(q_row, product(c));
}

SymmetricTensor raw_moment_tensor(const PceVector& z, int k, const MomentBudget& budget) {
  if (k < 0) throw std::invalid_argument("raw_moment_tensor: negative order");
  budget.check(z, k);
  MomentEngine engine(z, budget);
  SymmetricTensor t(k, z.dim(), 1);
  for (std::size_t j = 0; j < t.combos().size(); ++j)
    t.values()(0, static_cast<Eigen::Index>(j)) = engine.raw(t.combos()[j]);
  return t;
}

SymmetricTensor cross_moment(const PceVector& q, const PceVector& z, int k,
                             const MomentBudget& budget) {
  if (k < 0) throw std::invalid_argument("cross_moment: negative order");
  budget.check(z, k + 1);
  MomentEngine engine(z, budget);
  SymmetricTensor t(k, z.dim(), q.dim());
  for (std::size_t m = 0; m < q.dim(); ++m) {
    const auto row = to_sparse(q, m);
    for (std::size_t j = 0; j < t.combos().size(); ++j)
      t.values()(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) =
          engine.cross(row, t.combos()[j]);
  }
  return t;
}

}  // namespace polyfilter
