#pragma once

// Reference computations that share no code with the library's im2col/GEMM
// paths: direct nested-loop convolution, explicit scatter for the transpose,
// central finite differences and coefficient expansion for polynomials.

#include "qae/tensor.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace qae::oracle {

inline Tensor direct_conv(const Tensor& x, const KernelBank& k, std::span<const double> bias, bool same) {
    const long kk = static_cast<long>(k.kernel());
    const long pad = same ? (kk - 1) / 2 : 0;
    const long h = static_cast<long>(x.height()), w = static_cast<long>(x.width());
    const long oh = same ? h : h - kk + 1, ow = same ? w : w - kk + 1;
    Tensor out(Shape{k.out_channels(), static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)});
    for (std::size_t o = 0; o < k.out_channels(); ++o)
        for (long y = 0; y < oh; ++y)
            for (long xx = 0; xx < ow; ++xx) {
                double s = bias.empty() ? 0.0 : bias[o];
                for (std::size_t i = 0; i < k.in_channels(); ++i)
                    for (long u = 0; u < kk; ++u)
                        for (long v = 0; v < kk; ++v) {
                            const long sy = y + u - pad, sx = xx + v - pad;
                            if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                            s += k(o, i, static_cast<std::size_t>(u), static_cast<std::size_t>(v)) *
                                 x(i, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
                        }
                out(o, static_cast<std::size_t>(y), static_cast<std::size_t>(xx)) = s;
            }
    return out;
}

// Transposed convolution as an explicit scatter: every input pixel stamps
// its value times the kernel onto the (padded) output grid.
inline Tensor direct_conv_transpose(const Tensor& x, const KernelBank& k, std::span<const double> bias, bool same) {
    const long kk = static_cast<long>(k.kernel());
    const long pad = same ? (kk - 1) / 2 : 0;
    const long h = static_cast<long>(x.height()), w = static_cast<long>(x.width());
    const long oh = same ? h : h + kk - 1, ow = same ? w : w + kk - 1;
    Tensor out(Shape{k.out_channels(), static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)});
    for (std::size_t o = 0; o < k.out_channels(); ++o)
        for (std::size_t i = 0; i < k.in_channels(); ++i)
            for (long y = 0; y < h; ++y)
                for (long xx = 0; xx < w; ++xx)
                    for (long u = 0; u < kk; ++u)
                        for (long v = 0; v < kk; ++v) {
                            const long ty = y + u - pad, tx = xx + v - pad;
                            if (ty < 0 || ty >= oh || tx < 0 || tx >= ow) continue;
                            out(o, static_cast<std::size_t>(ty), static_cast<std::size_t>(tx)) +=
                                k(o, i, static_cast<std::size_t>(u), static_cast<std::size_t>(v)) *
                                x(i, static_cast<std::size_t>(y), static_cast<std::size_t>(xx));
                        }
    for (std::size_t o = 0; o < k.out_channels(); ++o)
        for (double& v : out.channel(o)) v += bias.empty() ? 0.0 : bias[o];
    return out;
}

inline Tensor random_tensor(Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Tensor t(s);
    for (double& v : t.values()) v = d(rng);
    return t;
}

inline KernelBank random_bank(std::size_t out, std::size_t in, std::size_t k, std::mt19937_64& rng,
                              double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    KernelBank b(out, in, k);
    for (double& v : b.values()) v = d(rng);
    return b;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

/// Central difference of f with respect to *param.
inline double central_difference(const std::function<double()>& f, double& param, double step) {
    const double original = param;
    param = original + step;
    const double up = f();
    param = original - step;
    const double down = f();
    param = original;
    return (up - down) / (2.0 * step);
}

/// Coefficients (ascending powers) of C * prod (x - r) * prod (x^2 + a x + b).
inline std::vector<double> expand(double scale, std::span<const double> roots,
                                  std::span<const std::pair<double, double>> quads) {
    std::vector<double> c{scale};
    auto times = [&](std::vector<double> f) {
        std::vector<double> out(c.size() + f.size() - 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < f.size(); ++j) out[i + j] += c[i] * f[j];
        c = std::move(out);
    };
    for (double r : roots) times({-r, 1.0});
    for (const auto& [a, b] : quads) times({b, a, 1.0});
    return c;
}

inline double horner(std::span<const double> coeffs, double x) {
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
    return v;
}

/// sum |c_k| |x|^k: the scale Horner's rounding error is proportional to.
inline double abs_horner(std::span<const double> coeffs, double x) {
    double v = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) v = v * std::abs(x) + std::abs(coeffs[i]);
    return v;
}

} // namespace qae::oracle
