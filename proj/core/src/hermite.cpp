#include "polyfilter/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace polyfilter {

MultiIndex::MultiIndex(std::initializer_list<int> dense)
    : MultiIndex(std::span<const int>(dense.begin(), dense.size())) {}

MultiIndex::MultiIndex(std::span<const int> dense) {
  for (std::size_t k = 0; k < dense.size(); ++k) {
    if (dense[k] < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    if (dense[k] > 0) {
      entries_.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(dense[k])});
      degree_ += dense[k];
    }
  }
}

MultiIndex MultiIndex::unit(std::size_t position, int exponent) {
  if (exponent < 0) throw std::invalid_argument("MultiIndex: negative exponent");
  MultiIndex alpha;
  if (exponent > 0) {
    alpha.entries_.push_back(
        {static_cast<std::uint32_t>(position), static_cast<std::uint32_t>(exponent)});
    alpha.degree_ = exponent;
  }
  return alpha;
}

MultiIndex MultiIndex::from_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.position < b.position; });
  MultiIndex alpha;
  for (const auto& e : entries) {
    if (e.exponent == 0) continue;
    if (!alpha.entries_.empty() && alpha.entries_.back().position == e.position)
      throw std::invalid_argument("MultiIndex: duplicate position");
    alpha.entries_.push_back(e);
    alpha.degree_ += static_cast<int>(e.exponent);
  }
  return alpha;
}

int MultiIndex::operator[](std::size_t position) const {
  for (const auto& e : entries_) {
    if (e.position == position) return static_cast<int>(e.exponent);
    if (e.position > position) break;
  }
  return 0;
}

std::size_t MultiIndex::extent() const {
  return entries_.empty() ? 0 : static_cast<std::size_t>(entries_.back().position) + 1;
}

std::vector<int> MultiIndex::dense(std::size_t dim) const {
  if (dim < extent()) throw std::invalid_argument("MultiIndex::dense: dimension too small");
  std::vector<int> out(dim, 0);
  for (const auto& e : entries_) out[e.position] = static_cast<int>(e.exponent);
  return out;
}

MultiIndex MultiIndex::shifted(std::size_t offset) const {
  MultiIndex out = *this;
  for (auto& e : out.entries_) e.position += static_cast<std::uint32_t>(offset);
  return out;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  MultiIndex out;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->position < b->position)) {
      out.entries_.push_back(*a++);
    } else if (a == entries_.end() || b->position < a->position) {
      out.entries_.push_back(*b++);
    } else {
      out.entries_.push_back({a->position, a->exponent + b->exponent});
      ++a;
      ++b;
    }
  }
  out.degree_ = degree_ + other.degree_;
  return out;
}

std::string MultiIndex::to_string(std::size_t dim) const {
  const auto d = std::max(dim, std::max<std::size_t>(extent(), 1));
  std::string s = "(";
  const auto v = dense(d);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(v[k]);
  }
  return s + ")";
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  if (a.total_degree() != b.total_degree()) return a.total_degree() < b.total_degree();
  // Walk both sparse lists in position order. At the first position where
  // the exponents differ, the index with the larger exponent sorts first.
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t i = 0, j = 0;
  while (i < ea.size() || j < eb.size()) {
    const auto pa = i < ea.size() ? ea[i].position : std::numeric_limits<std::uint32_t>::max();
    const auto pb = j < eb.size() ? eb[j].position : std::numeric_limits<std::uint32_t>::max();
    if (pa == pb) {
      if (ea[i].exponent != eb[j].exponent) return ea[i].exponent > eb[j].exponent;
      ++i;
      ++j;
    } else {
      // a has a positive exponent where b has zero (or vice versa).
      return pa < pb;
    }
  }
  return false;
}

std::size_t MultiIndexHash::operator()(const MultiIndex& alpha) const noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ull;
  for (const auto& e : alpha.entries()) {
    std::uint64_t v = (static_cast<std::uint64_t>(e.position) << 32) | e.exponent;
    v ^= v >> 33;
    v *= 0xff51afd7ed558ccdull;
    v ^= v >> 33;
    h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

double hermite1d(int n, double t) {
  if (n < 0) throw std::invalid_argument("hermite1d: negative degree");
  if (n == 0) return 1.0;
  double prev = 1.0, cur = t;
  for (int k = 1; k < n; ++k) {
    const double next = t * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void hermite1d_table(int n, double t, std::span<double> out) {
  if (n < 0 || out.size() < static_cast<std::size_t>(n) + 1)
    throw std::invalid_argument("hermite1d_table: output too small");
  out[0] = 1.0;
  if (n >= 1) out[1] = t;
  for (int k = 1; k < n; ++k) out[k + 1] = t * out[k] - k * out[k - 1];
}

double hermite_eval(const MultiIndex& alpha, std::span<const double> theta) {
  if (theta.size() < alpha.extent())
    throw std::invalid_argument("hermite_eval: germ vector shorter than multi-index extent");
  double value = 1.0;
  for (const auto& e : alpha.entries())
    value *= hermite1d(static_cast<int>(e.exponent), theta[e.position]);
  return value;
}

double factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  if (n < 20) {
    std::uint64_t f = 1;
    for (int k = 2; k <= n; ++k) f *= static_cast<std::uint64_t>(k);
    return static_cast<double>(f);
  }
  const double f = std::tgamma(static_cast<double>(n) + 1.0);
  if (!std::isfinite(f)) throw std::overflow_error("factorial: " + std::to_string(n) + "! overflows");
  return f;
}

double factorial_norm(const MultiIndex& alpha) {
  double norm = 1.0;
  for (const auto& e : alpha.entries()) {
    norm *= factorial(static_cast<int>(e.exponent));
    if (!std::isfinite(norm)) throw std::overflow_error("factorial_norm: overflow");
  }
  return norm;
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return std::round(b);
}

struct PairKey {
  MultiIndex a, b;
  friend bool operator==(const PairKey&, const PairKey&) = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const noexcept {
    const MultiIndexHash h;
    return h(k.a) * 31u + h(k.b);
  }
};

std::mutex cache_mutex;
std::unordered_map<PairKey, LinearizedProduct, PairKeyHash>& linearization_cache() {
  static std::unordered_map<PairKey, LinearizedProduct, PairKeyHash> cache;
  return cache;
}

LinearizedProduct compute_linearization(const MultiIndex& alpha, const MultiIndex& beta) {
  // Per germ position collect the univariate expansion, then take the
  // tensor product across positions.
  struct Factor {
    std::uint32_t position;
    std::vector<std::pair<std::uint32_t, double>> terms;  // exponent, coefficient
  };
  std::vector<Factor> factors;
  auto ea = alpha.entries();
  auto eb = beta.entries();
  std::size_t i = 0, j = 0;
  while (i < ea.size() || j < eb.size()) {
    std::uint32_t pos;
    int a = 0, b = 0;
    if (j == eb.size() || (i < ea.size() && ea[i].position < eb[j].position)) {
      pos = ea[i].position;
      a = static_cast<int>(ea[i++].exponent);
    } else if (i == ea.size() || eb[j].position < ea[i].position) {
      pos = eb[j].position;
      b = static_cast<int>(eb[j++].exponent);
    } else {
      pos = ea[i].position;
      a = static_cast<int>(ea[i++].exponent);
      b = static_cast<int>(eb[j++].exponent);
    }
    Factor f{pos, {}};
    for (int r = 0; r <= std::min(a, b); ++r)
      f.terms.emplace_back(static_cast<std::uint32_t>(a + b - 2 * r),
                           hermite_linearization_coefficient(a, b, r));
    factors.push_back(std::move(f));
  }

  LinearizedProduct out;
  std::vector<std::size_t> pick(factors.size(), 0);
  while (true) {
    std::vector<MultiIndex::Entry> entries;
    double c = 1.0;
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const auto& [exp, coef] = factors[k].terms[pick[k]];
      c *= coef;
      if (exp > 0) entries.push_back({factors[k].position, exp});
    }
    out.emplace_back(MultiIndex::from_entries(std::move(entries)), c);
    std::size_t k = 0;
    for (; k < factors.size(); ++k) {
      if (++pick[k] < factors[k].terms.size()) break;
      pick[k] = 0;
    }
    if (k == factors.size()) break;
  }
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return graded_lex_less(x.first, y.first); });
  return out;
}

}  // namespace

double hermite_linearization_coefficient(int a, int b, int r) {
  if (r < 0 || r > std::min(a, b)) return 0.0;
  return binomial(a, r) * binomial(b, r) * factorial(r);
}

LinearizedProduct product_linearize(const MultiIndex& alpha, const MultiIndex& beta) {
  PairKey key{alpha, beta};
  {
    std::lock_guard lock(cache_mutex);
    auto& cache = linearization_cache();
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto result = compute_linearization(alpha, beta);
  std::lock_guard lock(cache_mutex);
  linearization_cache().emplace(std::move(key), result);
  return result;
}

std::size_t product_linearize_cache_size() {
  std::lock_guard lock(cache_mutex);
  return linearization_cache().size();
}

double expect_hermite_product(std::span<const MultiIndex> alphas) {
  if (alphas.empty()) throw std::invalid_argument("expect_hermite_product: empty list");
  // The expectation factorizes over germ positions. For each position fold
  // the univariate linearization h_a h_b = sum_r c_r h_{a+b-2r} over all
  // factors and keep the coefficient of h_0.
  std::map<std::uint32_t, std::vector<int>> per_position;
  for (const auto& alpha : alphas)
    for (const auto& e : alpha.entries()) per_position[e.position].push_back(static_cast<int>(e.exponent));

  double value = 1.0;
  for (const auto& [pos, exps] : per_position) {
    (void)pos;
    int total = 0;
    for (int a : exps) total += a;
    if (total % 2 != 0) return 0.0;
    std::vector<double> poly(static_cast<std::size_t>(total) + 1, 0.0);
    poly[static_cast<std::size_t>(exps[0])] = 1.0;
    int deg = exps[0];
    for (std::size_t f = 1; f < exps.size(); ++f) {
      const int b = exps[f];
      std::vector<double> next(poly.size(), 0.0);
      for (int a = 0; a <= deg; ++a) {
        const double c = poly[static_cast<std::size_t>(a)];
        if (c == 0.0) continue;
        for (int r = 0; r <= std::min(a, b); ++r)
          next[static_cast<std::size_t>(a + b - 2 * r)] += c * hermite_linearization_coefficient(a, b, r);
      }
      poly.swap(next);
      deg += b;
    }
    value *= poly[0];
    if (value == 0.0) return 0.0;
  }
  return value;
}

}  // namespace polyfilter
