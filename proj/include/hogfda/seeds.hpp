// hogfda/seeds.hpp
//
// Stable seed derivation. Every random stream in the library is keyed by
// (master seed, stage name, item key...) so results never depend on the
// order in which work is scheduled.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace hogfda {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                          std::initializer_list<std::uint64_t> keys = {});

inline Rng make_rng(std::uint64_t master, std::string_view stage,
                    std::initializer_list<std::uint64_t> keys = {}) {
  return Rng(derive_seed(master, stage, keys));
}

// 64-bit FNV-1a, used for output checksums and string keys.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace hogfda
