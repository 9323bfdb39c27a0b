#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace spectre {

using Rng = std::mt19937_64;

/// Independent generator for (master seed, stream tag, index), derived by
/// SplitMix64 mixing so that trial i's randomness never depends on how many
/// trials ran before it or on which thread runs it.
Rng substream(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t index);

/// Circular complex normal with E|z|^2 = variance.
std::complex<double> complex_normal(Rng& rng, double variance = 1.0);

}  // namespace spectre
