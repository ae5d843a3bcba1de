#pragma once

#include <cstdint>
#include <random>

namespace fwreg {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Stream k of a master seed; independent of the order streams are requested in.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k);

inline Rng make_rng(std::uint64_t master, std::uint64_t k) { return Rng(derive_seed(master, k)); }

}  // namespace fwreg
