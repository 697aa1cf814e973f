#include "polyfilter/rng.hpp"

namespace polyfilter {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index) {
  // FNV-1a over the name, mixed with root and index.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix64(splitmix64(root ^ h) + splitmix64(index + 0x632BE59BD9B4E019ull));
}

}  // namespace polyfilter
