#pragma once

#include <cstdint>
#include <random>

namespace cis {

// substream kinds; values are frozen because they feed seed derivation,
// changing one changes every seeded output downstream
enum class Stream : std::uint64_t {
  generate = 1,
  replicate = 2,
  resample = 3,
  permutation = 4,
  perm_icis = 5,
  method = 6,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

inline std::uint64_t derive_seed(std::uint64_t seed, Stream kind, std::uint64_t index) {
  std::uint64_t h = detail::splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(kind));
  return detail::splitmix64(h ^ index);
}

inline std::mt19937_64 substream(std::uint64_t seed, Stream kind, std::uint64_t index) {
  return std::mt19937_64(derive_seed(seed, kind, index));
}

// explicit Fisher-Yates so shuffles do not depend on std::shuffle internals
template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> u(0, i - 1);
    std::swap(v[i - 1], v[u(rng)]);
  }
}

}  // namespace cis
