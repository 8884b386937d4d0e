#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hsl {

/// Purpose tag mixed into every derived stream seed.
enum class StreamTag : std::uint64_t {
  LocalSgd = 1,
  Push = 2,
  Gossip = 3,
  Pull = 4,
  Baseline = 5,
  Objective = 6,
  Partition = 7,
  Spectral = 8,
  Verify = 9,
};

/// Stream key derivation.
///
/// A child seed is a SplitMix64 chain over (master, round, tag, index):
///
///   h0 = mix(master)
///   h1 = mix(h0 ^ round)
///   h2 = mix(h1 ^ tag)
///   h3 = mix(h2 ^ index)
///
/// where mix(z) is the SplitMix64 finalizer applied to z + 0x9E3779B97F4A7C15.
/// The child stream only depends on its key, so the order or thread in which
/// streams are consumed never changes results.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t round, StreamTag tag,
                          std::uint64_t index) noexcept;

/// Seeded random stream (mt19937_64) with the sampling helpers used across the simulator.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng child(std::uint64_t master, std::uint64_t round, StreamTag tag, std::uint64_t index) {
    return Rng(derive_seed(master, round, tag, index));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);
  double uniform01();
  double normal();

  /// `k` distinct values drawn uniformly from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
  /// `k` distinct values drawn uniformly from [0, n) \ {excluded}.
  std::vector<std::size_t> sample_without_replacement_excluding(std::size_t n, std::size_t k,
                                                                std::size_t excluded);
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hsl
