#include "polyfilter/chaos_algebra.hpp"

#include <algorithm>

#include "polyfilter/pce.hpp"

namespace polyfilter {

SparseChaos to_sparse(const PceVector& q, std::size_t row) {
  SparseChaos out;
  out.reserve(q.terms());
  for (std::size_t j = 0; j < q.terms(); ++j) {
    const double c = q.coeffs()(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
    if (c != 0.0) out.emplace(q.basis()[j], c);
  }
  return out;
}

void accumulate_product(const MultiIndex& alpha, const MultiIndex& beta, double scale,
                        SparseChaos& out) {
  // Positions where both indices are active need the univariate expansion;
  // positions active in only one factor carry over unchanged.
  struct Shared {
    std::uint32_t position;
    int a, b;
  };
  std::vector<Shared> shared;
  std::vector<MultiIndex::Entry> fixed;
  auto ea = alpha.entries();
  auto eb = beta.entries();
  std::size_t i = 0, j = 0;
  while (i < ea.size() || j < eb.size()) {
    if (j == eb.size() || (i < ea.size() && ea[i].position < eb[j].position)) {
      fixed.push_back(ea[i++]);
    } else if (i == ea.size() || eb[j].position < ea[i].position) {
      fixed.push_back(eb[j++]);
    } else {
      shared.push_back({ea[i].position, static_cast<int>(ea[i].exponent),
                        static_cast<int>(eb[j].exponent)});
      ++i;
      ++j;
    }
  }
  if (shared.empty()) {
    out[MultiIndex::from_entries(std::move(fixed))] += scale;
    return;
  }
  std::vector<int> r(shared.size(), 0);
  while (true) {
    double c = scale;
    std::vector<MultiIndex::Entry> entries = fixed;
    for (std::size_t k = 0; k < shared.size(); ++k) {
      c *= hermite_linearization_coefficient(shared[k].a, shared[k].b, r[k]);
      const int e = shared[k].a + shared[k].b - 2 * r[k];
      if (e > 0) entries.push_back({shared[k].position, static_cast<std::uint32_t>(e)});
    }
    out[MultiIndex::from_entries(std::move(entries))] += c;
    std::size_t k = 0;
    for (; k < shared.size(); ++k) {
      if (++r[k] <= std::min(shared[k].a, shared[k].b)) break;
      r[k] = 0;
    }
    if (k == shared.size()) break;
  }
}

SparseChaos multiply(const SparseChaos& a, const SparseChaos& b) {
  SparseChaos out;
  out.reserve(a.size() * b.size());
  for (const auto& [alpha, ca] : a)
    for (const auto& [beta, cb] : b) accumulate_product(alpha, beta, ca * cb, out);
  return out;
}

double inner(const SparseChaos& a, const SparseChaos& b) {
  const SparseChaos& small = a.size() <= b.size() ? a : b;
  const SparseChaos& large = a.size() <= b.size() ? b : a;
  // Sum in graded-lex key order so the result does not depend on the hash
  // table's iteration order.
  std::vector<std::pair<const MultiIndex*, double>> terms;
  terms.reserve(small.size());
  for (const auto& [gamma, c] : small) {
    auto it = large.find(gamma);
    if (it != large.end()) terms.emplace_back(&gamma, c * it->second);
  }
  std::sort(terms.begin(), terms.end(),
            [](const auto& x, const auto& y) { return graded_lex_less(*x.first, *y.first); });
  double s = 0.0;
  for (const auto& [gamma, c] : terms) s += factorial_norm(*gamma) * c;
  return s;
}

int degree_of(const SparseChaos& a) {
  int d = 0;
  for (const auto& [alpha, c] : a) d = std::max(d, alpha.total_degree());
  return d;
}

PceVector from_sparse(const std::vector<SparseChaos>& rows, std::size_t germs) {
  std::vector<MultiIndex> keys;
  for (const auto& row : rows)
    for (const auto& [alpha, c] : row) keys.push_back(alpha);
  std::size_t dim = germs;
  for (const auto& k : keys) dim = std::max(dim, k.extent());
  auto basis = make_index_set(IndexSet(std::max<std::size_t>(dim, 1), std::move(keys)));
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                 static_cast<Eigen::Index>(basis->size()));
  for (std::size_t m = 0; m < rows.size(); ++m)
    for (const auto& [alpha, c] : rows[m])
      coeffs(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(*basis->find(alpha))) = c;
  return PceVector(basis, std::move(coeffs));
}

}  // namespace polyfilter
