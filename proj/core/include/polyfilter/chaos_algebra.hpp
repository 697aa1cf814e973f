#pragma once

// Scalar chaos expansions held as sparse maps, with exact products through
// the Hermite structure coefficients. Used to form moments and to expand
// polynomials of PCEs back into the Hermite basis.

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "polyfilter/hermite.hpp"

namespace polyfilter {

class PceVector;

using SparseChaos = std::unordered_map<MultiIndex, double, MultiIndexHash>;

/// Row m of q as a sparse expansion (exact zeros dropped).
SparseChaos to_sparse(const PceVector& q, std::size_t row);
/// Exact product sum_{a,b} A^a B^b H_a H_b re-expanded in the Hermite basis.
SparseChaos multiply(const SparseChaos& a, const SparseChaos& b);
/// E[A B] = sum_gamma gamma! A^gamma B^gamma.
double inner(const SparseChaos& a, const SparseChaos& b);
/// Adds `scale * h_a h_b` into `out` using the structure coefficients.
void accumulate_product(const MultiIndex& alpha, const MultiIndex& beta, double scale,
                        SparseChaos& out);
/// Highest total degree among the keys.
int degree_of(const SparseChaos& a);

/// Assembles a PceVector from one sparse expansion per row over `germs`
/// variables; the basis is the union of all keys.
PceVector from_sparse(const std::vector<SparseChaos>& rows, std::size_t germs);

}  // namespace polyfilter
