#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace minv {

/// 64-bit finalizer from SplitMix64.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for the named stream `name` derived from a root seed. Different names
/// give statistically independent streams; the mapping is stable across runs
/// and platforms.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name) noexcept;

/// Engine for a named stream.
std::mt19937_64 make_rng(std::uint64_t root, std::string_view name);

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
double uniform01(std::mt19937_64& rng) noexcept;

/// Standard normal via Box–Muller on `uniform01`.
double standard_normal(std::mt19937_64& rng) noexcept;

}  // namespace minv
