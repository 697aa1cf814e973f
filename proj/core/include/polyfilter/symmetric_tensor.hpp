#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace polyfilter {

/// Sorted index tuple i_1 <= ... <= i_k naming one entry of a symmetric tensor.
using Combination = std::vector<int>;

/// All sorted combinations of order k over {0..dimension-1} in lex order,
/// with a reverse lookup table.
struct CombinationTable {
  std::size_t dimension = 0;
  int order = 0;
  std::vector<Combination> combos;
  std::map<Combination, std::size_t> rank;
};

/// Shared, cached table for (dimension, order).
std::shared_ptr<const CombinationTable> combination_table(std::size_t dimension, int order);
/// C(dimension + order - 1, order).
std::size_t combination_count(std::size_t dimension, int order);
/// Number of distinct orderings of the multiset `c`: k! / prod(count_i!).
double multiplicity(std::span<const int> c);
/// Sorted union of two combinations.
Combination combine(std::span<const int> a, std::span<const int> b);

/// Symmetric k-th order tensor over R^dimension, optionally carrying `rows`
/// independent value channels (an M-valued tensor such as <q (x) z^k>).
///
/// Each sorted combination is stored once; lookups with an unsorted index
/// tuple are symmetrized first.
class SymmetricTensor {
 public:
  SymmetricTensor() = default;
  SymmetricTensor(int order, std::size_t dimension, std::size_t rows = 1);

  int order() const { return order_; }
  std::size_t dimension() const { return table_ ? table_->dimension : 0; }
  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(values_.cols()); }
  const std::vector<Combination>& combos() const { return table_->combos; }

  /// Column position of the entry named by `indices` (any order).
  std::size_t position(std::span<const int> indices) const;

  double at(std::span<const int> indices, std::size_t row = 0) const;
  double at(std::initializer_list<int> indices, std::size_t row = 0) const {
    return at(std::span<const int>(indices.begin(), indices.size()), row);
  }
  void set(std::span<const int> indices, double value, std::size_t row = 0);

  /// rows() x size() matrix, column j belongs to combos()[j].
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  /// Contracts the tensor with z on every slot: sum_{i_1..i_k} T_{i..} z_i1..z_ik.
  Eigen::VectorXd contract(const Eigen::VectorXd& z) const;

 private:
  int order_ = 0;
  std::shared_ptr<const CombinationTable> table_;
  Eigen::MatrixXd values_;
};

}  // namespace polyfilter
