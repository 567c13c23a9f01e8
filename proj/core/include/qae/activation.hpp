#pragma once

#include "qae/tensor.hpp"

#include <string>
#include <string_view>

namespace qae {

/// Pointwise nonlinearity applied after a neuron's aggregation.
struct Activation {
    enum class Kind { ReLU, Identity, Quadratic, RectifiedQuadratic };

    Kind kind{Kind::ReLU};
    double alpha{0.4};  // only used by the quadratic kinds

    static constexpr Activation relu() { return {Kind::ReLU, 0.4}; }
    static constexpr Activation identity() { return {Kind::Identity, 0.4}; }
    static constexpr Activation quadratic(double a = 0.4) { return {Kind::Quadratic, a}; }
    static constexpr Activation rectified_quadratic(double a = 0.4) {
        return {Kind::RectifiedQuadratic, a};
    }

    double apply(double x) const noexcept {
        switch (kind) {
        case Kind::ReLU: return x > 0.0 ? x : 0.0;
        case Kind::Identity: return x;
        case Kind::Quadratic: return alpha * x * x;
        case Kind::RectifiedQuadratic: return x > 0.0 ? alpha * x * x : 0.0;
        }
        return x;
    }

    /// Local derivative. ReLU and RectifiedQuadratic use 0 at exactly x == 0.
    double derivative(double x) const noexcept {
        switch (kind) {
        case Kind::ReLU: return x > 0.0 ? 1.0 : 0.0;
        case Kind::Identity: return 1.0;
        case Kind::Quadratic: return 2.0 * alpha * x;
        case Kind::RectifiedQuadratic: return x > 0.0 ? 2.0 * alpha * x : 0.0;
        }
        return 1.0;
    }

    friend bool operator==(const Activation&, const Activation&) = default;
};

Tensor apply_activation(const Activation& act, const Tensor& pre);
Tensor activation_gradient(const Activation& act, const Tensor& pre);

/// "relu", "identity", "quadratic", "rectified-quadratic".
std::string activation_name(Activation::Kind kind);
Activation parse_activation(std::string_view name, double alpha = 0.4);

} // namespace qae
