#include "polyfilter/index_set.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace polyfilter {

IndexSet::IndexSet(std::size_t dimension, std::vector<MultiIndex> indices)
    : dimension_(dimension), indices_(std::move(indices)) {
  if (dimension_ == 0) throw std::invalid_argument("IndexSet: dimension must be positive");
  indices_.emplace_back();
  std::sort(indices_.begin(), indices_.end(), GradedLexLess{});
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  position_.reserve(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i].extent() > dimension_)
      throw std::invalid_argument("IndexSet: index " + indices_[i].to_string() +
                                  " exceeds dimension " + std::to_string(dimension_));
    degree_bound_ = std::max(degree_bound_, indices_[i].total_degree());
    position_.emplace(indices_[i], i);
  }
}

IndexSet IndexSet::total_degree(std::size_t dim, int degree) {
  if (dim == 0) throw std::invalid_argument("total_degree: dim must be >= 1");
  if (degree < 0) throw std::invalid_argument("total_degree: negative degree");
  std::vector<MultiIndex> out;
  std::vector<int> exps(dim, 0);
  // Enumerate compositions of every total degree; the constructor sorts.
  auto recurse = [&](auto&& self, std::size_t k, int remaining) -> void {
    if (k + 1 == dim) {
      for (int e = 0; e <= remaining; ++e) {
        exps[k] = e;
        out.emplace_back(std::span<const int>(exps));
      }
      exps[k] = 0;
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      exps[k] = e;
      self(self, k + 1, remaining - e);
    }
    exps[k] = 0;
  };
  recurse(recurse, 0, degree);
  return IndexSet(dim, std::move(out));
}

IndexSet total_degree_set(std::size_t dim, int degree) { return IndexSet::total_degree(dim, degree); }

std::optional<std::size_t> IndexSet::find(const MultiIndex& alpha) const {
  auto it = position_.find(alpha);
  if (it == position_.end()) return std::nullopt;
  return it->second;
}

bool IndexSet::contains_all(const IndexSet& other) const {
  return std::all_of(other.begin(), other.end(),
                     [&](const MultiIndex& a) { return contains(a); });
}

IndexSet IndexSet::merged(const IndexSet& other) const {
  if (other.dimension_ <= dimension_ && contains_all(other)) return *this;
  std::vector<MultiIndex> all = indices_;
  all.insert(all.end(), other.indices_.begin(), other.indices_.end());
  return IndexSet(std::max(dimension_, other.dimension_), std::move(all));
}

IndexSet IndexSet::widened(std::size_t dimension) const {
  if (dimension < dimension_) throw std::invalid_argument("IndexSet::widened: cannot shrink");
  IndexSet out = *this;
  out.dimension_ = dimension;
  return out;
}

}  // namespace polyfilter
