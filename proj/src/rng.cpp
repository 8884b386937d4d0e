#include "hsl/rng.hpp"

#include <numeric>

#include "hsl/error.hpp"

namespace hsl {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t round, StreamTag tag,
                          std::uint64_t index) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ round);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  return splitmix64(h ^ index);
}

std::size_t Rng::uniform_index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

double Rng::uniform01() {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

double Rng::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw ContractViolation("sample_without_replacement: k > n");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + uniform_index(n - i)]);
  }
  pool.resize(k);
  return pool;
}

std::vector<std::size_t> Rng::sample_without_replacement_excluding(std::size_t n, std::size_t k,
                                                                   std::size_t excluded) {
  if (excluded >= n || k > n - 1) {
    throw ContractViolation("sample_without_replacement_excluding: k > n - 1");
  }
  auto picks = sample_without_replacement(n - 1, k);
  for (auto& v : picks) v += (v >= excluded);
  return picks;
}

}  // namespace hsl
