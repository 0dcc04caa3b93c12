#include "suburban/random.hpp"

#include <array>

namespace suburban {

double RandomStream::uniform() { return uniform_(*this); }

double RandomStream::normal() { return normal_(*this); }

SeededStream::SeededStream(std::uint64_t seed) {
  std::array<std::uint32_t, 4> words{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(splitmix64(seed)),
      static_cast<std::uint32_t>(splitmix64(seed) >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

}  // namespace suburban
