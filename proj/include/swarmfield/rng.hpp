#pragma once

#include <cstdint>
#include <random>

namespace swarmfield::rng {

// Counter-based streams: every draw is keyed by (seed, stream, index, counter)
// so the value an agent receives never depends on evaluation order.

enum class Stream : std::uint64_t
{
  Init = 1,
  Motion = 2,
  Measurement = 3,
  Test = 99,
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t key(std::uint64_t seed, Stream stream, std::uint64_t index,
                         std::uint64_t counter) noexcept
{
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ index);
  return splitmix64(h ^ counter);
}

//! A short-lived engine for one (agent, step) cell of the counter space.
inline std::mt19937_64 engine(std::uint64_t seed, Stream stream, std::uint64_t index,
                              std::uint64_t counter)
{
  return std::mt19937_64(key(seed, stream, index, counter));
}

} // namespace swarmfield::rng
