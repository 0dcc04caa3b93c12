#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace suburban {

/// Source of randomness for every sampler in the library.
///
/// Satisfies UniformRandomBitGenerator so it can feed std::shuffle and the
/// std distributions directly. The virtual uniform()/normal() hooks make it
/// possible to substitute a scripted stream in tests.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  virtual ~RandomStream() = default;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  virtual result_type operator()() = 0;

  /// Uniform draw on [0, 1).
  virtual double uniform();
  /// Standard normal draw.
  virtual double normal();

 private:
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// 64-bit Mersenne twister stream.
class SeededStream final : public RandomStream {
 public:
  explicit SeededStream(std::uint64_t seed);

  result_type operator()() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for trial `trial` of sweep point `point`.
///
/// Distinct (point, trial) pairs with both indices below 2^32 map to distinct
/// seeds for a fixed master seed: the key is packed injectively and every
/// step after that is a bijection.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed,
                                    std::uint64_t point, std::uint64_t trial) {
  const std::uint64_t key = (point << 32) | (trial & 0xFFFFFFFFULL);
  return splitmix64(master_seed + splitmix64(key));
}

/// Independent sub-stream seed for a named role inside one chain.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t role) {
  return splitmix64(splitmix64(seed) ^ (0xD1B54A32D192ED03ULL * (role + 1)));
}

}  // namespace suburban
