#pragma once

#include <cstdint>
#include <initializer_list>

namespace mmfe {

// Counter-based generation: every draw is a pure function of a key, so any
// entry of a random array can be produced out of order and reproduced later.

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Combines a sequence of words into one 64-bit key.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept;

/// Uniform on the open interval (0, 1).
double uniform_from_bits(std::uint64_t bits) noexcept;

/// Standard normal draw addressed by `key` (Box-Muller on two derived uniforms).
double standard_normal_at(std::uint64_t key) noexcept;

/// A sequential stream of draws for one (seed, stream id) pair.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(hash_words({seed, stream})) {}

  double normal() noexcept { return standard_normal_at(hash_words({key_, counter_++})); }
  double uniform() noexcept { return uniform_from_bits(mix64(hash_words({key_, counter_++}))); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mmfe
