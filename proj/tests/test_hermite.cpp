#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "polyfilter/hermite.hpp"
#include "polyfilter/index_set.hpp"
#include "polyfilter/quadrature.hpp"
#include "support.hpp"

namespace polyfilter {
namespace {

using test::Gen;

// Explicit monomial forms, independent of the recurrence.
double hermite_closed_form(int n, double t) {
  switch (n) {
    case 0: return 1.0;
    case 1: return t;
    case 2: return t * t - 1.0;
    case 3: return t * t * t - 3.0 * t;
    case 4: return t * t * t * t - 6.0 * t * t + 3.0;
    case 5: return std::pow(t, 5) - 10.0 * std::pow(t, 3) + 15.0 * t;
    default: return std::nan("");
  }
}

// E[prod H_alpha] by tensor Gauss-Hermite quadrature, exact for the degrees used.
double quadrature_expectation(const std::vector<MultiIndex>& alphas) {
  std::size_t dim = 1;
  int degree = 0;
  for (const auto& a : alphas) {
    dim = std::max(dim, a.extent());
    degree += a.total_degree();
  }
  const auto rule = gauss_hermite_1d(degree / 2 + 1);
  double value = 1.0;
  for (std::size_t pos = 0; pos < dim; ++pos) {
    double e = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double t = rule.nodes()(0, static_cast<Eigen::Index>(i));
      double p = 1.0;
      for (const auto& a : alphas) p *= hermite1d(a[pos], t);
      e += rule.weights()(static_cast<Eigen::Index>(i)) * p;
    }
    value *= e;
  }
  return value;
}

TEST(MultiIndex, TrailingZerosArePadding) {
  EXPECT_EQ(MultiIndex({1, 2}), MultiIndex({1, 2, 0, 0}));
  EXPECT_EQ(MultiIndex({0, 0}), MultiIndex());
  EXPECT_EQ(MultiIndex({3, 0, 1}).total_degree(), 4);
  EXPECT_EQ(MultiIndex({3, 0, 1}).extent(), 3u);
}

TEST(MultiIndex, RejectsNegativeExponent) {
  EXPECT_THROW(MultiIndex({1, -1}), std::invalid_argument);
}

TEST(TotalDegreeSet, Examples) {
  const auto s1 = total_degree_set(1, 2);
  ASSERT_EQ(s1.size(), 3u);
  EXPECT_EQ(s1[0], MultiIndex({0}));
  EXPECT_EQ(s1[1], MultiIndex({1}));
  EXPECT_EQ(s1[2], MultiIndex({2}));

  const auto s2 = total_degree_set(2, 1);
  ASSERT_EQ(s2.size(), 3u);
  EXPECT_EQ(s2[0], MultiIndex({0, 0}));
  EXPECT_EQ(s2[1], MultiIndex({1, 0}));
  EXPECT_EQ(s2[2], MultiIndex({0, 1}));

  EXPECT_EQ(total_degree_set(3, 2).size(), 10u);
  EXPECT_EQ(total_degree_set(4, 0).size(), 1u);
}

TEST(TotalDegreeSet, MatchesBruteForceEnumeration) {
  for (std::size_t dim = 1; dim <= 4; ++dim) {
    for (int deg = 0; deg <= 5; ++deg) {
      // Enumerate the box [0, deg]^dim and keep total degree <= deg.
      std::set<std::vector<int>> expected;
      std::vector<int> e(dim, 0);
      while (true) {
        int total = 0;
        for (int x : e) total += x;
        if (total <= deg) expected.insert(e);
        std::size_t k = 0;
        while (k < dim && ++e[k] > deg) e[k++] = 0;
        if (k == dim) break;
      }
      const auto set = total_degree_set(dim, deg);
      ASSERT_EQ(set.size(), expected.size()) << dim << " " << deg;
      for (const auto& alpha : set) EXPECT_TRUE(expected.count(alpha.dense(dim)));
      EXPECT_TRUE(set[0].is_zero());
      for (std::size_t i = 1; i < set.size(); ++i) EXPECT_TRUE(graded_lex_less(set[i - 1], set[i]));
    }
  }
}

TEST(IndexSet, MergeKeepsOrderAndZero) {
  IndexSet a(2, {MultiIndex({2, 0}), MultiIndex({0, 1})});
  IndexSet b(3, {MultiIndex({0, 0, 1}), MultiIndex({0, 1})});
  const auto m = a.merged(b);
  EXPECT_EQ(m.dimension(), 3u);
  EXPECT_TRUE(m[0].is_zero());
  EXPECT_EQ(m.size(), 4u);
  EXPECT_TRUE(m.contains_all(a));
  EXPECT_TRUE(m.contains_all(b));
  for (std::size_t i = 1; i < m.size(); ++i) EXPECT_TRUE(graded_lex_less(m[i - 1], m[i]));
}

TEST(HermiteEval, Examples) {
  const std::vector<double> t1{5.0, -3.0};
  EXPECT_DOUBLE_EQ(hermite_eval(MultiIndex({0, 0}), t1), 1.0);
  const std::vector<double> t2{1.7, -0.4};
  EXPECT_DOUBLE_EQ(hermite_eval(MultiIndex({1, 1}), t2), 1.7 * -0.4);
  const std::vector<double> t3{2.0};
  EXPECT_DOUBLE_EQ(hermite_eval(MultiIndex({2}), t3), 3.0);
}

TEST(HermiteEval, DimensionMismatchThrows) {
  const std::vector<double> theta{1.0};
  EXPECT_THROW(hermite_eval(MultiIndex({0, 2}), theta), std::invalid_argument);
}

TEST(HermiteEval, RecurrenceMatchesClosedForms) {
  Gen gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = gen.uniform(-4.0, 4.0);
    for (int n = 0; n <= 5; ++n)
      EXPECT_NEAR(hermite1d(n, t), hermite_closed_form(n, t), 1e-11 * std::max(1.0, std::pow(std::abs(t), n)));
  }
}

TEST(FactorialNorm, Examples) {
  EXPECT_DOUBLE_EQ(factorial_norm(MultiIndex({0, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(factorial_norm(MultiIndex({2, 1})), 2.0);
  EXPECT_DOUBLE_EQ(factorial_norm(MultiIndex({3, 2})), 12.0);
  EXPECT_DOUBLE_EQ(factorial(20), 2432902008176640000.0);
}

TEST(FactorialNorm, OverflowIsReported) {
  EXPECT_THROW(factorial(171), std::overflow_error);
  EXPECT_THROW(factorial(-1), std::invalid_argument);
}

TEST(ProductLinearize, Examples) {
  const MultiIndex beta({2, 1});
  const auto unit = product_linearize(MultiIndex({0}), beta);
  ASSERT_EQ(unit.size(), 1u);
  EXPECT_EQ(unit[0].first, beta);
  EXPECT_DOUBLE_EQ(unit[0].second, 1.0);

  std::map<int, double> t11;
  for (const auto& [g, c] : product_linearize(MultiIndex({1}), MultiIndex({1}))) t11[g[0]] = c;
  EXPECT_EQ(t11, (std::map<int, double>{{0, 1.0}, {2, 1.0}}));

  std::map<int, double> t21;
  for (const auto& [g, c] : product_linearize(MultiIndex({2}), MultiIndex({1}))) t21[g[0]] = c;
  EXPECT_EQ(t21, (std::map<int, double>{{1, 2.0}, {3, 1.0}}));
}

TEST(ProductLinearize, OnlyNonzeroCoefficients) {
  for (const auto& [g, c] : product_linearize(MultiIndex({3, 1, 2}), MultiIndex({2, 2, 0}))) {
    (void)g;
    EXPECT_NE(c, 0.0);
  }
}

TEST(ProductLinearizeProperty, PointwiseIdentity) {
  Gen gen(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(gen.integer(1, 4));
    const auto a = gen.multi_index(dim, 6);
    const auto b = gen.multi_index(dim, 6);
    const auto lin = product_linearize(a, b);
    for (int p = 0; p < 3; ++p) {
      std::vector<double> theta(dim);
      for (auto& t : theta) t = gen.uniform(-2.5, 2.5);
      const double lhs = hermite_eval(a, theta) * hermite_eval(b, theta);
      double rhs = 0.0, scale = 0.0;
      for (const auto& [g, c] : lin) {
        const double term = c * hermite_eval(g, theta);
        rhs += term;
        scale += std::abs(term);
      }
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, scale)) << a.to_string() << " * " << b.to_string();
    }
  }
}

TEST(ProductLinearizeProperty, Symmetric) {
  Gen gen(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(gen.integer(1, 4));
    const auto a = gen.multi_index(dim, 6);
    const auto b = gen.multi_index(dim, 6);
    EXPECT_EQ(product_linearize(a, b), product_linearize(b, a));
  }
}

TEST(ExpectHermiteProduct, Examples) {
  const std::vector<MultiIndex> odd{MultiIndex({1})};
  EXPECT_DOUBLE_EQ(expect_hermite_product(odd), 0.0);
  const std::vector<MultiIndex> triple{MultiIndex({1}), MultiIndex({1}), MultiIndex({2})};
  EXPECT_DOUBLE_EQ(expect_hermite_product(triple), 2.0);
  EXPECT_THROW(expect_hermite_product(std::vector<MultiIndex>{}), std::invalid_argument);
}

TEST(ExpectHermiteProductProperty, Orthogonality) {
  Gen gen(14);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(gen.integer(1, 4));
    const auto a = gen.multi_index(dim, 6);
    const auto b = trial % 3 == 0 ? a : gen.multi_index(dim, 6);
    const std::vector<MultiIndex> pair{a, b};
    if (a == b)
      EXPECT_EQ(expect_hermite_product(pair), factorial_norm(a));
    else
      EXPECT_EQ(expect_hermite_product(pair), 0.0);
  }
}

TEST(ExpectHermiteProductProperty, PermutationInvariantAndMatchesQuadrature) {
  Gen gen(15);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(gen.integer(1, 3));
    std::vector<MultiIndex> alphas;
    const int count = gen.integer(2, 4);
    for (int i = 0; i < count; ++i) alphas.push_back(gen.multi_index(dim, 4));
    const double value = expect_hermite_product(alphas);
    EXPECT_NEAR(value, quadrature_expectation(alphas), 1e-9 * std::max(1.0, std::abs(value)));
    std::reverse(alphas.begin(), alphas.end());
    EXPECT_EQ(expect_hermite_product(alphas), value);
    std::rotate(alphas.begin(), alphas.begin() + 1, alphas.end());
    EXPECT_EQ(expect_hermite_product(alphas), value);
  }
}

TEST(ExpectHermiteProductProperty, MonteCarloWithinFourStandardErrors) {
  Gen gen(16);
  std::mt19937_64 engine(1616);
  std::normal_distribution<double> normal;
  constexpr std::size_t kSamples = 1'000'000;
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(gen.integer(1, 3));
    std::vector<MultiIndex> alphas;
    const int count = gen.integer(3, 4);
    int total = 0;
    for (int i = 0; i < count; ++i) {
      alphas.push_back(gen.multi_index(dim, std::max(0, std::min(3, 8 - total))));
      total += alphas.back().total_degree();
    }
    ASSERT_LE(total, 8);
    double sum = 0.0, sum2 = 0.0;
    std::vector<double> theta(dim);
    for (std::size_t s = 0; s < kSamples; ++s) {
      for (auto& t : theta) t = normal(engine);
      double p = 1.0;
      for (const auto& a : alphas) p *= hermite_eval(a, theta);
      sum += p;
      sum2 += p * p;
    }
    const double mc = sum / kSamples;
    const double se = std::sqrt(std::max(sum2 / kSamples - mc * mc, 0.0) / kSamples);
    EXPECT_LE(std::abs(expect_hermite_product(alphas) - mc), 4.0 * se + 1e-12) << "trial " << trial;
  }
}

TEST(Quadrature, WeightsNormalizedAndExact) {
  for (int n = 1; n <= 12; ++n) {
    const auto rule = gauss_hermite_1d(n);
    EXPECT_NEAR(rule.weights().sum(), 1.0, 1e-12);
    EXPECT_TRUE((rule.weights().array() > 0.0).all());
    // E[t^{2k}] = (2k-1)!! for 2k <= 2n-1.
    double dfact = 1.0;
    for (int k = 1; 2 * k <= 2 * n - 1; ++k) {
      dfact *= 2 * k - 1;
      double e = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i)
        e += rule.weights()(static_cast<Eigen::Index>(i)) *
             std::pow(rule.nodes()(0, static_cast<Eigen::Index>(i)), 2 * k);
      EXPECT_NEAR(e, dfact, 1e-10 * dfact) << n << " " << k;
    }
  }
  const auto tensor = tensor_gauss_hermite(3, 4);
  EXPECT_EQ(tensor.size(), 64u);
  EXPECT_NEAR(tensor.weights().sum(), 1.0, 1e-12);
  EXPECT_THROW(tensor_gauss_hermite(8, 10, 1000), std::length_error);
}

}  // namespace
}  // namespace polyfilter
