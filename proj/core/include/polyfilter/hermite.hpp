#pragma once

// Multi-indices and the probabilists' Hermite polynomial algebra.
//
// Convention: h_0 = 1, h_1(t) = t, h_{n+1}(t) = t h_n(t) - n h_{n-1}(t).
// These are orthogonal under the standard Gaussian measure with
// E[h_a h_b] = delta_ab a!. Physicists' Hermite polynomials (H_1 = 2t)
// are NOT used anywhere in this library.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace polyfilter {

/// Exponent vector of a multivariate Hermite basis function.
///
/// Stored sparsely as (germ position, exponent) pairs with strictly
/// increasing positions and positive exponents, so two indices that differ
/// only by trailing zero padding compare equal and hash identically.
class MultiIndex {
 public:
  struct Entry {
    std::uint32_t position;
    std::uint32_t exponent;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  MultiIndex() = default;
  /// Dense construction; entry k is the exponent of germ variable k.
  MultiIndex(std::initializer_list<int> dense);
  explicit MultiIndex(std::span<const int> dense);

  /// Single germ variable `position` raised to `exponent`.
  static MultiIndex unit(std::size_t position, int exponent = 1);
  /// Builds from (position, exponent) pairs in any order; zero exponents are dropped.
  static MultiIndex from_entries(std::vector<Entry> entries);

  int operator[](std::size_t position) const;
  int total_degree() const { return degree_; }
  bool is_zero() const { return entries_.empty(); }
  /// One past the largest position holding a nonzero exponent.
  std::size_t extent() const;
  std::span<const Entry> entries() const { return entries_; }

  /// Dense exponent vector of length `dim`; throws if dim < extent().
  std::vector<int> dense(std::size_t dim) const;
  /// Index with every position shifted by `offset` germs.
  MultiIndex shifted(std::size_t offset) const;
  /// Entrywise sum.
  MultiIndex operator+(const MultiIndex& other) const;

  std::string to_string(std::size_t dim = 0) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<Entry> entries_;
  int degree_ = 0;
};

/// Graded-lex order: lower total degree first; within a degree, compare the
/// dense exponent vectors from position 0 and put the larger exponent first,
/// so (1,0) precedes (0,1).
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& alpha) const noexcept;
};

struct GradedLexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    return graded_lex_less(a, b);
  }
};

/// h_n(t) by the three-term recurrence.
double hermite1d(int n, double t);
/// Fills out[0..n] with h_0(t) .. h_n(t).
void hermite1d_table(int n, double t, std::span<double> out);

/// H_alpha(theta) = prod_k h_{alpha_k}(theta_k).
/// Throws std::invalid_argument when theta is shorter than alpha.extent().
double hermite_eval(const MultiIndex& alpha, std::span<const double> theta);

/// n! in double precision; exact integer arithmetic below 20!.
double factorial(int n);
/// alpha! = prod_k alpha_k! = E[H_alpha^2]. Throws std::overflow_error when
/// the product is not representable.
double factorial_norm(const MultiIndex& alpha);

/// Coefficient of h_{a+b-2r} in h_a h_b: C(a,r) C(b,r) r!.
double hermite_linearization_coefficient(int a, int b, int r);

using LinearizedProduct = std::vector<std::pair<MultiIndex, double>>;

/// Structure coefficients c^gamma_{alpha,beta} of H_alpha H_beta =
/// sum_gamma c^gamma H_gamma, graded-lex ordered, nonzero entries only.
/// Results are memoized in a process-wide cache guarded by a mutex.
LinearizedProduct product_linearize(const MultiIndex& alpha, const MultiIndex& beta);

/// Number of (alpha, beta) pairs currently held by the linearization cache.
std::size_t product_linearize_cache_size();

/// E[prod_i H_{alpha_i}] under independent standard Gaussian germs.
/// Throws std::invalid_argument on an empty list.
double expect_hermite_product(std::span<const MultiIndex> alphas);

}  // namespace polyfilter
