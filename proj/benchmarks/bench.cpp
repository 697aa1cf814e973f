#include <benchmark/benchmark.h>

#include <random>

#include "polyfilter/hermite.hpp"
#include "polyfilter/index_set.hpp"
#include "polyfilter/models.hpp"
#include "polyfilter/pce.hpp"
#include "polyfilter/quadrature.hpp"
#include "polyfilter/update.hpp"

namespace {

using namespace polyfilter;

PceVector random_pce(std::size_t outputs, std::size_t germs, int degree, std::uint64_t seed) {
  auto basis = make_index_set(total_degree_set(germs, degree));
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd c(static_cast<Eigen::Index>(outputs), static_cast<Eigen::Index>(basis->size()));
  for (auto& v : c.reshaped()) v = 0.5 * normal(engine);
  return PceVector(basis, c);
}

void BM_ProductLinearize(benchmark::State& state) {
  const auto set = total_degree_set(3, static_cast<int>(state.range(0)));
  for (auto _ : state)
    for (std::size_t i = 0; i < set.size(); ++i) benchmark::DoNotOptimize(product_linearize(set[i], set[set.size() - 1 - i]));
}
BENCHMARK(BM_ProductLinearize)->Arg(2)->Arg(4);

void BM_RawMoment(benchmark::State& state) {
  const auto z = random_pce(2, 3, 3, 1);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(raw_moment_tensor(z, k));
}
BENCHMARK(BM_RawMoment)->DenseRange(2, 4);

void BM_HankelSolve(benchmark::State& state) {
  const auto q = random_pce(3, 3, 2, 2);
  const auto z = random_pce(2, 3, 2, 3);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_update_map(build_hankel_system(z, q, n)));
}
BENCHMARK(BM_HankelSolve)->DenseRange(1, 3);

void BM_PropagateLorenz(benchmark::State& state) {
  const auto prior = PceVector::gaussian(Eigen::Vector3d(1.0, 0.5, 0.0), 0.2 * Eigen::Matrix3d::Identity());
  const auto basis = make_index_set(total_degree_set(3, 3));
  const auto rule = tensor_gauss_hermite(3, 5);
  const Lorenz84Config cfg;
  for (auto _ : state) benchmark::DoNotOptimize(propagate_pce(prior, 1.0, cfg, basis, rule));
}
BENCHMARK(BM_PropagateLorenz);

}  // namespace
BENCHMARK_MAIN();
