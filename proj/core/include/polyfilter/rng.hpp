#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace polyfilter {

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the named substream `name`, member `index`, of a root seed. Each
/// (root, name, index) triple gives an independent, schedule-free stream.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t root, std::string_view name, std::uint64_t index = 0)
      : engine_(substream_seed(root, name, index)) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace polyfilter
