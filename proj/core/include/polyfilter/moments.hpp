#pragma once

#include <cstddef>
#include <map>

#include "polyfilter/chaos_algebra.hpp"
#include "polyfilter/pce.hpp"
#include "polyfilter/symmetric_tensor.hpp"

namespace polyfilter {

/// Analytic monomial moments E[z^c] and E[q_m z^c] of a PCE z.
///
/// Products z^c = prod_{i in c} z_i are formed exactly in the Hermite
/// algebra and memoized; a moment of order k is the inner product of two
/// products of orders ceil(k/2) and floor(k/2).
class MomentEngine {
 public:
  explicit MomentEngine(const PceVector& z, const MomentBudget& budget = {});

  std::size_t dimension() const { return z_.dim(); }
  const PceVector& variable() const { return z_; }

  /// The expansion of z^c.
  const SparseChaos& product(const Combination& c);
  /// E[z^c] for a combination of any order within the budget.
  double raw(const Combination& c);
  /// E[q_m z^c].
  double cross(const SparseChaos& q_row, const Combination& c);

 private:
  void check_order(int order) const;

  PceVector z_;
  MomentBudget budget_;
  std::vector<SparseChaos> components_;
  std::map<Combination, SparseChaos> products_;
  std::map<Combination, double> raw_cache_;
};

}  // namespace polyfilter
