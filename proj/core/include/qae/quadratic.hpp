#pragma once

// Quadratic neurons.
//
// A quadratic neuron replaces the inner product w.x + b with
//
//     (w_r.x + b_r) * (w_g.x + b_g) + w_b.(x*x) + c
//
// and then applies an ordinary activation. Sliding it over an image gives the
// quadratic convolution: three convolutions (W_r and W_g over x, W_b over x^2)
// combined pointwise. With w_g = 0, b_g = 1, w_b = 0 (and c = 0) it reduces to
// a conventional neuron with weights w_r and bias b_r.

#include "qae/activation.hpp"
#include "qae/conv.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace qae {

/// Vector-form neuron on n inputs; exactly 3n + 3 trainable scalars.
struct QuadraticParams {
    std::vector<double> w_r;
    std::vector<double> w_g;
    std::vector<double> w_b;
    double b_r{0.0};
    double b_g{0.0};
    double c{0.0};

    static QuadraticParams zeros(std::size_t n);

    std::size_t inputs() const noexcept { return w_r.size(); }
    std::size_t parameter_count() const noexcept { return w_r.size() + w_g.size() + w_b.size() + 3; }
};

double quad_preactivation(std::span<const double> x, const QuadraticParams& p);
double quad_forward(std::span<const double> x, const QuadraticParams& p, const Activation& act);

/// Parameter groups of one quadratic convolutional layer. Biases are per output channel.
enum class ParamGroup { WeightR, WeightG, WeightB, BiasR, BiasG, Offset };

std::string_view group_name(ParamGroup g);

struct QuadraticConvParams {
    KernelBank w_r;
    KernelBank w_g;
    KernelBank w_b;
    std::vector<double> b_r;
    std::vector<double> b_g;
    std::vector<double> c;

    static QuadraticConvParams zeros(std::size_t out_channels, std::size_t in_channels,
                                     std::size_t kernel);

    std::size_t out_channels() const noexcept { return w_r.out_channels(); }
    std::size_t in_channels() const noexcept { return w_r.in_channels(); }
    std::size_t kernel() const noexcept { return w_r.kernel(); }
    std::size_t parameter_count() const noexcept {
        return w_r.size() + w_g.size() + w_b.size() + b_r.size() + b_g.size() + c.size();
    }

    /// Throws ShapeError unless all three banks and all three bias vectors agree.
    void validate() const;

    std::span<double> group(ParamGroup g);
    std::span<const double> group(ParamGroup g) const;

    /// Visits (ParamGroup, values) in checkpoint order: W_r, W_g, W_b, b_r, b_g, c.
    template <class F>
    void for_each_group(F&& f) {
        for (ParamGroup g : kGroups) f(g, group(g));
    }
    template <class F>
    void for_each_group(F&& f) const {
        for (ParamGroup g : kGroups) f(g, group(g));
    }

    static constexpr ParamGroup kGroups[] = {ParamGroup::WeightR, ParamGroup::WeightG,
                                             ParamGroup::WeightB, ParamGroup::BiasR,
                                             ParamGroup::BiasG,   ParamGroup::Offset};

    friend bool operator==(const QuadraticConvParams&, const QuadraticConvParams&) = default;
};

/// Intermediate values kept from the forward pass for backpropagation.
struct QuadraticConvCache {
    Tensor input;
    RowMatrix cols;     // im2col(x)
    RowMatrix cols_sq;  // im2col(x^2)
    Tensor r;           // W_r * x + b_r
    Tensor g;           // W_g * x + b_g
    Tensor pre;         // r*g + W_b * x^2 + c
};

struct QuadraticConvGrads {
    QuadraticConvParams params;
    Tensor input;
};

QuadraticConvCache quad_conv_forward_cached(const Tensor& x, const QuadraticConvParams& p,
                                            const SpatialOp& op);

/// Backpropagates dL/d(pre-activation) through one quadratic convolution.
QuadraticConvGrads quad_conv_backward_cached(const QuadraticConvCache& cache,
                                             const QuadraticConvParams& p, const SpatialOp& op,
                                             const Tensor& grad_pre);

Tensor quad_conv_forward(const Tensor& x, const QuadraticConvParams& p, const SpatialOp& op,
                         const Activation& act);
Tensor quad_conv_forward(const Tensor& x, const QuadraticConvParams& p, PadMode pad,
                         const Activation& act);

/// Gradients of L with respect to every parameter group and the input, given
/// dL/dy for y = act(quadratic convolution of x). The activation derivative is
/// applied here.
QuadraticConvGrads quad_backward(const Tensor& x, const QuadraticConvParams& p, const SpatialOp& op,
                                 const Activation& act, const Tensor& upstream);

} // namespace qae
