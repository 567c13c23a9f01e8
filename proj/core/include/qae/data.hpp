#pragma once

// Intensity windowing, patch sampling and the synthetic CT-like corpus used
// in place of clinical data.

#include "qae/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qae {

inline constexpr double kTrainWindowLowHu = -300.0;
inline constexpr double kTrainWindowHighHu = 300.0;
inline constexpr double kDisplayWindowLowHu = -160.0;
inline constexpr double kDisplayWindowHighHu = 240.0;

/// Maps the training HU window linearly onto [0, 1], clamping outside it.
double normalize_hu(double hu) noexcept;
double denormalize_hu(double normalized) noexcept;
Tensor normalize_hu(const Tensor& hu);
Tensor denormalize_hu(const Tensor& normalized);

struct Image16 {
    std::size_t height{0};
    std::size_t width{0};
    std::vector<std::uint16_t> pixels;
};

/// Linear map [lo, hi] -> [0, 65535], clamped, rounded half up.
/// Throws ArgumentError when lo >= hi or the image has more than one channel.
Image16 render_window(const Tensor& hu, double lo = kDisplayWindowLowHu, double hi = kDisplayWindowHighHu);

struct PatchPair {
    Tensor noisy;
    Tensor clean;
};

/// `count` aligned size x size crops with uniformly random top-left corners.
/// Throws ArgumentError if the images are smaller than `size` or differ in shape.
std::vector<PatchPair> extract_patches(const Tensor& noisy, const Tensor& clean, std::size_t size,
                                       std::size_t count, std::uint64_t seed);

/// Spreads `count` patches over several image pairs (as evenly as possible, in
/// image order), each image drawing from its own seed stream.
std::vector<PatchPair> extract_patches(std::span<const Tensor> noisy, std::span<const Tensor> clean,
                                       std::size_t size, std::size_t count, std::uint64_t seed);

/// Piecewise-constant ellipses and rectangles in [-200, 250] HU over a -50 HU
/// background, plus low-contrast texture. Throws ArgumentError when size < 64.
Tensor synth_phantom(std::uint64_t seed, std::size_t size);

struct NoiseSpec {
    /// Additive, signal-independent standard deviation (HU).
    double sigma_hu{30.0};
    /// Relative dose; the signal-dependent part scales with 1/sqrt(dose).
    double dose_factor{1.0};
    /// Signal-dependent standard deviation at water (0 HU) and dose 1.
    double quantum_hu{20.0};
};

/// Zero-mean Gaussian noise with per-pixel variance
/// sigma^2 + quantum^2 * max(v + 1000, 0) / 1000 / dose.
Tensor add_noise(const Tensor& clean_hu, const NoiseSpec& noise, std::uint64_t seed);

struct SyntheticPair {
    Tensor clean_hu;
    Tensor noisy_hu;
};

/// `count` phantom/noisy pairs; pair i uses seed streams indexed by i.
std::vector<SyntheticPair> synth_corpus(std::size_t count, std::size_t size, const NoiseSpec& noise,
                                        std::uint64_t seed);

} // namespace qae
