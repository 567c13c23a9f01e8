#include "qae/linear_layer.hpp"

namespace qae {

LinearConvParams LinearConvParams::zeros(std::size_t out_channels, std::size_t in_channels,
                                         std::size_t kernel) {
    return LinearConvParams{KernelBank(out_channels, in_channels, kernel),
                            std::vector<double>(out_channels, 0.0)};
}

LinearConvCache linear_forward_cached(const Tensor& x, const LinearConvParams& p, const SpatialOp& op) {
    check_bank(x, p.w, p.b, op, "linear layer");
    LinearConvCache cache{x, im2col(x, op), {}};
    cache.pre = apply_bank(cache.cols, p.w, p.b, op.output_shape(x.shape(), p.w.out_channels()));
    return cache;
}

LinearConvGrads linear_backward_cached(const LinearConvCache& cache, const LinearConvParams& p,
                                       const SpatialOp& op, const Tensor& grad_pre) {
    LinearConvGrads grads{LinearConvParams::zeros(p.w.out_channels(), p.w.in_channels(), p.w.kernel()),
                          {}};
    accumulate_bank_gradient(grad_pre, cache.cols, grads.params.w);
    accumulate_bias_gradient(grad_pre, grads.params.b);
    grads.input = col2im(column_gradient(p.w, grad_pre), op, cache.input.shape());
    return grads;
}

} // namespace qae
