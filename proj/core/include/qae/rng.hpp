#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qae {

/// Derives an independent 64-bit seed for a named consumer from one root
/// seed, so adding a consumer never perturbs the streams of the others.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, std::string_view stream) {
    return Rng(derive_seed(root, stream));
}
inline Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index) {
    return Rng(derive_seed(root, stream, index));
}

/// Normal(mean, stddev) resampled until it lies within `bound` standard deviations.
double truncated_normal(Rng& rng, double mean, double stddev, double bound = 2.0);

} // namespace qae
