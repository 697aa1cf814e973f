#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "polyfilter/hermite.hpp"

namespace polyfilter {

/// Ordered, duplicate-free set of multi-indices over `dimension` germs.
///
/// The zero index always sits at position 0 and the remaining indices are
/// sorted graded-lex, so the same set always yields the same coefficient
/// layout.
class IndexSet {
 public:
  IndexSet() : IndexSet(1, {}) {}
  /// Sorts, removes duplicates and inserts the zero index if missing.
  /// Throws if an index reaches past `dimension`.
  IndexSet(std::size_t dimension, std::vector<MultiIndex> indices);

  /// All multi-indices in `dim` germs with total degree <= `degree`.
  static IndexSet total_degree(std::size_t dim, int degree);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return indices_.size(); }
  int degree_bound() const { return degree_bound_; }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  std::optional<std::size_t> find(const MultiIndex& alpha) const;
  bool contains(const MultiIndex& alpha) const { return find(alpha).has_value(); }
  /// True when every index of `other` is contained in this set.
  bool contains_all(const IndexSet& other) const;

  /// Union of both sets; the dimension is the larger of the two. Indices of
  /// the lower-dimensional set are zero padded.
  IndexSet merged(const IndexSet& other) const;
  /// Same indices over a larger germ dimension.
  IndexSet widened(std::size_t dimension) const;

  friend bool operator==(const IndexSet& a, const IndexSet& b) {
    return a.dimension_ == b.dimension_ && a.indices_ == b.indices_;
  }

 private:
  std::size_t dimension_;
  int degree_bound_ = 0;
  std::vector<MultiIndex> indices_;
  std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> position_;
};

using IndexSetPtr = std::shared_ptr<const IndexSet>;

inline IndexSetPtr make_index_set(IndexSet set) {
  return std::make_shared<const IndexSet>(std::move(set));
}

/// Convenience wrapper returning total_degree(dim, degree).
IndexSet total_degree_set(std::size_t dim, int degree);

}  // namespace polyfilter
