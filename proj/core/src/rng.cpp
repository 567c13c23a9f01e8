#include "qae/rng.hpp"

#include <cmath>

namespace qae {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
    return splitmix64(splitmix64(root) ^ fnv1a(stream));
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index) {
    return splitmix64(derive_seed(root, stream) + splitmix64(index + 1));
}

double truncated_normal(Rng& rng, double mean, double stddev, double bound) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        const double z = normal(rng);
        if (std::abs(z) <= bound) return mean + stddev * z;
    }
}

} // namespace qae
