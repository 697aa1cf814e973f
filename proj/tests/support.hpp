#pragma once

// Hand-rolled random generators shared by the property tests.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "polyfilter/index_set.hpp"
#include "polyfilter/pce.hpp"

namespace polyfilter::test {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::uint64_t bits() { return engine_(); }

  Eigen::VectorXd vector(Eigen::Index n, double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (auto& x : v) x = scale * normal();
    return v;
  }

  Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = scale * normal();
    return m;
  }

  /// Well-conditioned SPD matrix: A A^T / n + shift I.
  Eigen::MatrixXd spd(Eigen::Index n, double shift = 0.5) {
    const Eigen::MatrixXd a = matrix(n, n);
    return a * a.transpose() / static_cast<double>(n) + shift * Eigen::MatrixXd::Identity(n, n);
  }

  MultiIndex multi_index(std::size_t dim, int max_degree) {
    std::vector<int> e(dim, 0);
    int budget = integer(0, max_degree);
    for (int k = 0; k < budget; ++k) ++e[static_cast<std::size_t>(integer(0, static_cast<int>(dim) - 1))];
    return MultiIndex(std::span<const int>(e));
  }

  /// Random PCE on the full total-degree basis, coefficients shrinking with degree.
  PceVector pce(std::size_t outputs, std::size_t germs, int degree, double scale = 1.0) {
    auto basis = make_index_set(total_degree_set(germs, degree));
    Eigen::MatrixXd c(static_cast<Eigen::Index>(outputs), static_cast<Eigen::Index>(basis->size()));
    for (std::size_t j = 0; j < basis->size(); ++j) {
      const double decay = scale * std::pow(0.5, (*basis)[j].total_degree());
      for (Eigen::Index m = 0; m < c.rows(); ++m) c(m, static_cast<Eigen::Index>(j)) = decay * normal();
    }
    return PceVector(basis, c);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace polyfilter::test
