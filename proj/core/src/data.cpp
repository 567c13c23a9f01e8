#include "qae/data.hpp"

#include "qae/errors.hpp"
#include "qae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qae {

double normalize_hu(double hu) noexcept {
    return std::clamp((hu - kTrainWindowLowHu) / (kTrainWindowHighHu - kTrainWindowLowHu), 0.0, 1.0);
}

double denormalize_hu(double normalized) noexcept {
    return normalized * (kTrainWindowHighHu - kTrainWindowLowHu) + kTrainWindowLowHu;
}

Tensor normalize_hu(const Tensor& hu) {
    Tensor out(hu.shape());
    for (std::size_t i = 0; i < hu.size(); ++i) out[i] = normalize_hu(hu[i]);
    return out;
}

Tensor denormalize_hu(const Tensor& normalized) {
    Tensor out(normalized.shape());
    for (std::size_t i = 0; i < normalized.size(); ++i) out[i] = denormalize_hu(normalized[i]);
    return out;
}

Image16 render_window(const Tensor& hu, double lo, double hi) {
    if (!(lo < hi)) throw ArgumentError("display window needs lo < hi");
    if (hu.channels() != 1) throw ArgumentError("render_window expects a single-channel image");
    Image16 img{hu.height(), hu.width(), std::vector<std::uint16_t>(hu.size())};
    for (std::size_t i = 0; i < hu.size(); ++i) {
        const double t = std::clamp((hu[i] - lo) / (hi - lo), 0.0, 1.0);
        img.pixels[i] = static_cast<std::uint16_t>(std::floor(t * 65535.0 + 0.5));
    }
    return img;
}

namespace {

Tensor crop(const Tensor& img, std::size_t y0, std::size_t x0, std::size_t size) {
    Tensor out(Shape{img.channels(), size, size});
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = 0; y < size; ++y)
            for (std::size_t x = 0; x < size; ++x) out(c, y, x) = img(c, y0 + y, x0 + x);
    return out;
}

} // namespace

std::vector<PatchPair> extract_patches(const Tensor& noisy, const Tensor& clean, std::size_t size,
                                       std::size_t count, std::uint64_t seed) {
    if (noisy.shape() != clean.shape()) {
        throw ArgumentError("patch extraction: noisy " + to_string(noisy.shape()) + " vs clean " +
                            to_string(clean.shape()));
    }
    if (size == 0 || noisy.height() < size || noisy.width() < size) {
        throw ArgumentError("patch extraction: image " + to_string(noisy.shape()) +
                            " is smaller than the " + std::to_string(size) + "px patch");
    }
    Rng rng = make_rng(seed, "patches");
    std::uniform_int_distribution<std::size_t> ys(0, noisy.height() - size);
    std::uniform_int_distribution<std::size_t> xs(0, noisy.width() - size);
    std::vector<PatchPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t y0 = ys(rng);
        const std::size_t x0 = xs(rng);
        out.push_back(PatchPair{crop(noisy, y0, x0, size), crop(clean, y0, x0, size)});
    }
    return out;
}

std::vector<PatchPair> extract_patches(std::span<const Tensor> noisy, std::span<const Tensor> clean,
                                       std::size_t size, std::size_t count, std::uint64_t seed) {
    if (noisy.size() != clean.size()) throw ArgumentError("patch extraction: unpaired image lists");
    if (count > 0 && noisy.empty()) throw ArgumentError("patch extraction: no images");
    std::vector<PatchPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        const std::size_t share = count / noisy.size() + (i < count % noisy.size() ? 1 : 0);
        auto part = extract_patches(noisy[i], clean[i], size, share, derive_seed(seed, "image", i));
        std::move(part.begin(), part.end(), std::back_inserter(out));
    }
    return out;
}

Tensor synth_phantom(std::uint64_t seed, std::size_t size) {
    if (size < 64) throw ArgumentError("phantom size must be >= 64, got " + std::to_string(size));
    Rng rng = make_rng(seed, "phantom");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

    const double s = static_cast<double>(size);
    Tensor img = Tensor::image(size, size, -50.0);

    struct Blob {
        bool ellipse;
        double cx, cy, rx, ry, angle, hu;
    };
    const int blobs = 6 + static_cast<int>(unit(rng) * 7.0);
    std::vector<Blob> shapes;
    for (int i = 0; i < blobs; ++i) {
        shapes.push_back(Blob{unit(rng) < 0.7, uniform(0.1, 0.9) * s, uniform(0.1, 0.9) * s,
                              uniform(0.04, 0.25) * s, uniform(0.04, 0.25) * s,
                              uniform(0.0, std::numbers::pi), std::round(uniform(-200.0, 250.0))});
    }
    struct Wave {
        double fx, fy, phase, amp;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < 4; ++i) {
        waves.push_back(Wave{uniform(0.05, 0.45), uniform(0.05, 0.45), uniform(0.0, 2 * std::numbers::pi),
                             uniform(1.0, 4.0)});
    }

    for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
            const double px = static_cast<double>(x) + 0.5;
            const double py = static_cast<double>(y) + 0.5;
            double v = -50.0;
            for (const Blob& b : shapes) {
                const double dx = px - b.cx;
                const double dy = py - b.cy;
                const double u = (dx * std::cos(b.angle) + dy * std::sin(b.angle)) / b.rx;
                const double w = (-dx * std::sin(b.angle) + dy * std::cos(b.angle)) / b.ry;
                const bool inside = b.ellipse ? (u * u + w * w <= 1.0) : (std::abs(u) <= 1.0 && std::abs(w) <= 1.0);
                if (inside) v = b.hu;
            }
            double texture = 0.0;
            for (const Wave& wv : waves) texture += wv.amp * std::sin(wv.fx * px + wv.fy * py + wv.phase);
            img(0, y, x) = v + texture;
        }
    }
    return img;
}

Tensor add_noise(const Tensor& clean_hu, const NoiseSpec& noise, std::uint64_t seed) {
    Rng rng = make_rng(seed, "noise");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double dose_scale = std::isinf(noise.dose_factor) ? 0.0 : 1.0 / noise.dose_factor;
    Tensor out(clean_hu.shape());
    for (std::size_t i = 0; i < clean_hu.size(); ++i) {
        const double v = clean_hu[i];
        const double variance = noise.sigma_hu * noise.sigma_hu +
                                noise.quantum_hu * noise.quantum_hu * std::max(v + 1000.0, 0.0) / 1000.0 * dose_scale;
        const double z = normal(rng);
        out[i] = variance > 0.0 ? v + std::sqrt(variance) * z : v;
    }
    return out;
}

std::vector<SyntheticPair> synth_corpus(std::size_t count, std::size_t size, const NoiseSpec& noise,
                                        std::uint64_t seed) {
    std::vector<SyntheticPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Tensor clean = synth_phantom(derive_seed(seed, "corpus-phantom", i), size);
        Tensor noisy = add_noise(clean, noise, derive_seed(seed, "corpus-noise", i));
        out.push_back(SyntheticPair{std::move(clean), std::move(noisy)});
    }
    return out;
}

} // namespace qae
