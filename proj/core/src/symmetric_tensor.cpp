#include "polyfilter/symmetric_tensor.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

#include "polyfilter/hermite.hpp"

namespace polyfilter {

namespace {

std::mutex table_mutex;

void enumerate(std::size_t dimension, int order, Combination& cur, int start,
               std::vector<Combination>& out) {
  if (static_cast<int>(cur.size()) == order) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < static_cast<int>(dimension); ++i) {
    cur.push_back(i);
    enumerate(dimension, order, cur, i, out);
    cur.pop_back();
  }
}

}  // namespace

std::shared_ptr<const CombinationTable> combination_table(std::size_t dimension, int order) {
  if (order < 0) throw std::invalid_argument("combination_table: negative order");
  static std::map<std::pair<std::size_t, int>, std::shared_ptr<const CombinationTable>> cache;
  std::lock_guard lock(table_mutex);
  auto key = std::make_pair(dimension, order);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto table = std::make_shared<CombinationTable>();
  table->dimension = dimension;
  table->order = order;
  Combination cur;
  enumerate(dimension, order, cur, 0, table->combos);
  for (std::size_t i = 0; i < table->combos.size(); ++i) table->rank.emplace(table->combos[i], i);
  cache.emplace(key, table);
  return table;
}

std::size_t combination_count(std::size_t dimension, int order) {
  if (order == 0) return 1;
  if (dimension == 0) return 0;
  // C(n + k - 1, k)
  double c = 1.0;
  for (int i = 1; i <= order; ++i) c = c * static_cast<double>(dimension - 1 + i) / i;
  return static_cast<std::size_t>(c + 0.5);
}

double multiplicity(std::span<const int> c) {
  double m = factorial(static_cast<int>(c.size()));
  std::size_t i = 0;
  while (i < c.size()) {
    std::size_t j = i;
    while (j < c.size() && c[j] == c[i]) ++j;
    m /= factorial(static_cast<int>(j - i));
    i = j;
  }
  return m;
}

Combination combine(std::span<const int> a, std::span<const int> b) {
  Combination out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  return out;
}

SymmetricTensor::SymmetricTensor(int order, std::size_t dimension, std::size_t rows)
    : order_(order), table_(combination_table(dimension, order)) {
  values_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(table_->combos.size()));
}

std::size_t SymmetricTensor::position(std::span<const int> indices) const {
  if (static_cast<int>(indices.size()) != order_)
    throw std::invalid_argument("SymmetricTensor: index arity does not match order");
  Combination key(indices.begin(), indices.end());
  std::sort(key.begin(), key.end());
  auto it = table_->rank.find(key);
  if (it == table_->rank.end()) throw std::out_of_range("SymmetricTensor: index out of range");
  return it->second;
}

double SymmetricTensor::at(std::span<const int> indices, std::size_t row) const {
  return values_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(position(indices)));
}

void SymmetricTensor::set(std::span<const int> indices, double value, std::size_t row) {
  values_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(position(indices))) = value;
}

Eigen::VectorXd SymmetricTensor::contract(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) != dimension())
    throw std::invalid_argument("SymmetricTensor::contract: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(values_.rows());
  for (std::size_t j = 0; j < combos().size(); ++j) {
    const auto& c = combos()[j];
    double mono = multiplicity(c);
    for (int i : c) mono *= z(i);
    out += mono * values_.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

}  // namespace polyfilter
