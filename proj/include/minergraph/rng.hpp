#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace minergraph {

// Seed split scheme. Every random stream derives from one root seed:
//
//   derive_seed(root, label, index) = splitmix64(splitmix64(root ^ fnv1a(label)) + index)
//
// Labels in use: "synth" (chain generator), "dominating" and "threshold"
// (index = slice k). Restart r of a multi-start search seeds its generator
// with splitmix64(slice_seed + r).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(root ^ fnv1a(label)) + index);
}

using Rng = std::mt19937_64;

}  // namespace minergraph
