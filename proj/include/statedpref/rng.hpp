#pragma once

#include <cstdint>
#include <random>

namespace statedpref {

//! Every stochastic routine owns one of these, seeded from its arguments.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

//! Stable 64-bit mix of (base, stream). Used to derive per-replication,
//! per-restart and per-permutation seeds independently of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

} // namespace statedpref
