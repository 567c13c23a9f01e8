#pragma once

#include "qae/conv.hpp"

#include <string_view>
#include <vector>

namespace qae {

/// Conventional (inner-product) convolutional layer: W * x + b.
struct LinearConvParams {
    KernelBank w;
    std::vector<double> b;

    static LinearConvParams zeros(std::size_t out_channels, std::size_t in_channels, std::size_t kernel);

    std::size_t parameter_count() const noexcept { return w.size() + b.size(); }

    /// Visits (name, values) for every parameter group in checkpoint order.
    template <class F>
    void for_each_group(F&& f) {
        f(std::string_view("w"), std::span<double>(w.values()));
        f(std::string_view("b"), std::span<double>(b));
    }
    template <class F>
    void for_each_group(F&& f) const {
        f(std::string_view("w"), std::span<const double>(w.values()));
        f(std::string_view("b"), std::span<const double>(b));
    }

    friend bool operator==(const LinearConvParams&, const LinearConvParams&) = default;
};

struct LinearConvCache {
    Tensor input;
    RowMatrix cols;
    Tensor pre;
};

struct LinearConvGrads {
    LinearConvParams params;
    Tensor input;
};

LinearConvCache linear_forward_cached(const Tensor& x, const LinearConvParams& p, const SpatialOp& op);

/// `grad_pre` is dL/d(pre-activation output).
LinearConvGrads linear_backward_cached(const LinearConvCache& cache, const LinearConvParams& p,
                                       const SpatialOp& op, const Tensor& grad_pre);

} // namespace qae
