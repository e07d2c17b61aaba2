#include "mmfe/random.hpp"

#include <cmath>
#include <numbers>

namespace mmfe {

std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) {
    h = mix64(h ^ mix64(w));
  }
  return h;
}

double uniform_from_bits(std::uint64_t bits) noexcept {
  // 53 random mantissa bits, shifted by half an ulp so 0 is never returned.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal_at(std::uint64_t key) noexcept {
  const double u1 = uniform_from_bits(mix64(key ^ 0x243f6a8885a308d3ULL));
  const double u2 = uniform_from_bits(mix64(key ^ 0x13198a2e03707344ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mmfe
