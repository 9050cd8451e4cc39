#pragma once

#include <cstdint>
#include <random>

namespace angsurf {

using Rng = std::mt19937_64;

// Default seed used by the command line tool.
inline constexpr std::uint64_t kDefaultSeed = 20140101;

/// Seed for an independent stream `stream` derived from a base seed (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

double uniform01(Rng& rng);
double standard_normal(Rng& rng);
double standard_exponential(Rng& rng);

/// log of a Gamma(shape, 1) variate; stays finite for very small shapes.
double log_gamma_variate(Rng& rng, double shape);

/// Beta(p, q) variate strictly inside (0,1).
double beta_variate(Rng& rng, double p, double q);

}  // namespace angsurf
