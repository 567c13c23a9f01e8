#include "qae/quadratic.hpp"

#include "qae/errors.hpp"

#include <string>

namespace qae {

Tensor apply_activation(const Activation& act, const Tensor& pre) {
    Tensor out(pre.shape());
    for (std::size_t i = 0; i < pre.size(); ++i) out[i] = act.apply(pre[i]);
    return out;
}

Tensor activation_gradient(const Activation& act, const Tensor& pre) {
    Tensor out(pre.shape());
    for (std::size_t i = 0; i < pre.size(); ++i) out[i] = act.derivative(pre[i]);
    return out;
}

std::string activation_name(Activation::Kind kind) {
    switch (kind) {
    case Activation::Kind::ReLU: return "relu";
    case Activation::Kind::Identity: return "identity";
    case Activation::Kind::Quadratic: return "quadratic";
    case Activation::Kind::RectifiedQuadratic: return "rectified-quadratic";
    }
    return "relu";
}

Activation parse_activation(std::string_view name, double alpha) {
    if (name == "relu") return Activation::relu();
    if (name == "identity") return Activation::identity();
    if (name == "quadratic") return Activation::quadratic(alpha);
    if (name == "rectified-quadratic") return Activation::rectified_quadratic(alpha);
    throw ArgumentError("unknown activation '" + std::string(name) +
                        "' (expected relu, identity, quadratic, rectified-quadratic)");
}

QuadraticParams QuadraticParams::zeros(std::size_t n) {
    return QuadraticParams{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                           std::vector<double>(n, 0.0), 0.0, 0.0, 0.0};
}

double quad_preactivation(std::span<const double> x, const QuadraticParams& p) {
    if (x.size() != p.w_r.size() || p.w_g.size() != p.w_r.size() || p.w_b.size() != p.w_r.size()) {
        throw ShapeError("quadratic neuron: input length " + std::to_string(x.size()) +
                         " does not match weight length " + std::to_string(p.w_r.size()));
    }
    double r = p.b_r;
    double g = p.b_g;
    double power = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r += p.w_r[i] * x[i];
        g += p.w_g[i] * x[i];
        power += p.w_b[i] * x[i] * x[i];
    }
    return r * g + power + p.c;
}

double quad_forward(std::span<const double> x, const QuadraticParams& p, const Activation& act) {
    return act.apply(quad_preactivation(x, p));
}

std::string_view group_name(ParamGroup g) {
    switch (g) {
    case ParamGroup::WeightR: return "w_r";
    case ParamGroup::WeightG: return "w_g";
    case ParamGroup::WeightB: return "w_b";
    case ParamGroup::BiasR: return "b_r";
    case ParamGroup::BiasG: return "b_g";
    case ParamGroup::Offset: return "c";
    }
    return "?";
}

QuadraticConvParams QuadraticConvParams::zeros(std::size_t out_channels, std::size_t in_channels,
                                               std::size_t kernel) {
    return QuadraticConvParams{KernelBank(out_channels, in_channels, kernel),
                               KernelBank(out_channels, in_channels, kernel),
                               KernelBank(out_channels, in_channels, kernel),
                               std::vector<double>(out_channels, 0.0),
                               std::vector<double>(out_channels, 0.0),
                               std::vector<double>(out_channels, 0.0)};
}

void QuadraticConvParams::validate() const {
    if (!w_r.same_shape(w_g) || !w_r.same_shape(w_b)) {
        throw ShapeError("quadratic layer: W_r, W_g, W_b must share one shape");
    }
    const std::size_t n = w_r.out_channels();
    if (b_r.size() != n || b_g.size() != n || c.size() != n) {
        throw ShapeError("quadratic layer: b_r, b_g, c must have one entry per output channel");
    }
}

std::span<double> QuadraticConvParams::group(ParamGroup g) {
    switch (g) {
    case ParamGroup::WeightR: return w_r.values();
    case ParamGroup::WeightG: return w_g.values();
    case ParamGroup::WeightB: return w_b.values();
    case ParamGroup::BiasR: return b_r;
    case ParamGroup::BiasG: return b_g;
    case ParamGroup::Offset: return c;
    }
    return {};
}

std::span<const double> QuadraticConvParams::group(ParamGroup g) const {
    return const_cast<QuadraticConvParams&>(*this).group(g);
}

QuadraticConvCache quad_conv_forward_cached(const Tensor& x, const QuadraticConvParams& p,
                                            const SpatialOp& op) {
    p.validate();
    check_bank(x, p.w_r, p.b_r, op, "quadratic layer");
    const Shape out_shape = op.output_shape(x.shape(), p.out_channels());

    QuadraticConvCache cache;
    cache.input = x;
    cache.cols = im2col(x, op);
    cache.cols_sq = cache.cols.cwiseProduct(cache.cols);
    cache.r = apply_bank(cache.cols, p.w_r, p.b_r, out_shape);
    cache.g = apply_bank(cache.cols, p.w_g, p.b_g, out_shape);
    cache.pre = apply_bank(cache.cols_sq, p.w_b, p.c, out_shape);
    for (std::size_t i = 0; i < cache.pre.size(); ++i) {
        cache.pre[i] = cache.r[i] * cache.g[i] + cache.pre[i];
    }
    return cache;
}

QuadraticConvGrads quad_conv_backward_cached(const QuadraticConvCache& cache,
                                             const QuadraticConvParams& p, const SpatialOp& op,
                                             const Tensor& grad_pre) {
    require_same_shape(grad_pre, cache.pre, "quadratic backward");

    // d pre / d r = g and d pre / d g = r, pointwise.
    const Tensor grad_r = mul(grad_pre, cache.g);
    const Tensor grad_g = mul(grad_pre, cache.r);

    QuadraticConvGrads grads{QuadraticConvParams::zeros(p.out_channels(), p.in_channels(), p.kernel()),
                             {}};
    accumulate_bank_gradient(grad_r, cache.cols, grads.params.w_r);
    accumulate_bank_gradient(grad_g, cache.cols, grads.params.w_g);
    accumulate_bank_gradient(grad_pre, cache.cols_sq, grads.params.w_b);
    accumulate_bias_gradient(grad_r, grads.params.b_r);
    accumulate_bias_gradient(grad_g, grads.params.b_g);
    accumulate_bias_gradient(grad_pre, grads.params.c);

    // dx = adjoint(W_r)[grad_r] + adjoint(W_g)[grad_g] + 2x * adjoint(W_b)[grad_pre]
    RowMatrix linear_cols = column_gradient(p.w_r, grad_r);
    linear_cols.noalias() += column_gradient(p.w_g, grad_g);
    grads.input = col2im(linear_cols, op, cache.input.shape());
    const Tensor power = col2im(column_gradient(p.w_b, grad_pre), op, cache.input.shape());
    for (std::size_t i = 0; i < grads.input.size(); ++i) {
        grads.input[i] += 2.0 * cache.input[i] * power[i];
    }
    return grads;
}

Tensor quad_conv_forward(const Tensor& x, const QuadraticConvParams& p, const SpatialOp& op,
                         const Activation& act) {
    return apply_activation(act, quad_conv_forward_cached(x, p, op).pre);
}

Tensor quad_conv_forward(const Tensor& x, const QuadraticConvParams& p, PadMode pad,
                         const Activation& act) {
    return quad_conv_forward(x, p, SpatialOp{ConvDirection::Forward, pad, p.kernel()}, act);
}

QuadraticConvGrads quad_backward(const Tensor& x, const QuadraticConvParams& p, const SpatialOp& op,
                                 const Activation& act, const Tensor& upstream) {
    const QuadraticConvCache cache = quad_conv_forward_cached(x, p, op);
    require_same_shape(upstream, cache.pre, "quadratic backward");
    const Tensor grad_pre = mul(upstream, activation_gradient(act, cache.pre));
    return quad_conv_backward_cached(cache, p, op, grad_pre);
}

} // namespace qae
