#include "qae/conv.hpp"

#include "qae/errors.hpp"

#include <string>

namespace qae {

std::size_t SpatialOp::output_extent(std::size_t in) const {
    if (direction == ConvDirection::Transposed) {
        return pad == PadMode::Same ? in : in + kernel - 1;
    }
    if (pad == PadMode::Same) return in;
    if (in < kernel) {
        throw ShapeError("valid convolution with kernel " + std::to_string(kernel) +
                         " needs extent >= kernel, got " + std::to_string(in));
    }
    return in - kernel + 1;
}

Shape SpatialOp::output_shape(const Shape& in, std::size_t out_channels) const {
    return Shape{out_channels, output_extent(in.height), output_extent(in.width)};
}

namespace {

// Source coordinate for output position `o` and kernel tap `t`; negative or
// >= extent means the tap reads padding.
inline std::ptrdiff_t source_index(const SpatialOp& op, std::size_t o, std::size_t t) {
    const auto pad = static_cast<std::ptrdiff_t>(op.padding());
    const auto oo = static_cast<std::ptrdiff_t>(o);
    const auto tt = static_cast<std::ptrdiff_t>(t);
    return op.direction == ConvDirection::Forward ? oo + tt - pad : oo - tt + pad;
}

} // namespace

RowMatrix im2col(const Tensor& input, const SpatialOp& op) {
    const std::size_t k = op.kernel;
    const std::size_t oh = op.output_extent(input.height());
    const std::size_t ow = op.output_extent(input.width());
    const auto h = static_cast<std::ptrdiff_t>(input.height());
    const auto w = static_cast<std::ptrdiff_t>(input.width());

    RowMatrix cols = RowMatrix::Zero(static_cast<Eigen::Index>(input.channels() * k * k),
                                     static_cast<Eigen::Index>(oh * ow));
    for (std::size_t c = 0; c < input.channels(); ++c) {
        const double* plane = input.channel(c).data();
        for (std::size_t u = 0; u < k; ++u) {
            for (std::size_t v = 0; v < k; ++v) {
                double* row = cols.row(static_cast<Eigen::Index>((c * k + u) * k + v)).data();
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const std::ptrdiff_t sy = source_index(op, oy, u);
                    if (sy < 0 || sy >= h) continue;
                    const double* src = plane + sy * w;
                    double* dst = row + oy * ow;
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const std::ptrdiff_t sx = source_index(op, ox, v);
                        if (sx >= 0 && sx < w) dst[ox] = src[sx];
                    }
                }
            }
        }
    }
    return cols;
}

Tensor col2im(const RowMatrix& cols, const SpatialOp& op, const Shape& input_shape) {
    const std::size_t k = op.kernel;
    const std::size_t oh = op.output_extent(input_shape.height);
    const std::size_t ow = op.output_extent(input_shape.width);
    if (static_cast<std::size_t>(cols.rows()) != input_shape.channels * k * k ||
        static_cast<std::size_t>(cols.cols()) != oh * ow) {
        throw ShapeError("col2im: column matrix does not match input shape " +
                         to_string(input_shape));
    }
    const auto h = static_cast<std::ptrdiff_t>(input_shape.height);
    const auto w = static_cast<std::ptrdiff_t>(input_shape.width);

    Tensor out(input_shape);
    for (std::size_t c = 0; c < input_shape.channels; ++c) {
        double* plane = out.channel(c).data();
        for (std::size_t u = 0; u < k; ++u) {
            for (std::size_t v = 0; v < k; ++v) {
                const double* row = cols.row(static_cast<Eigen::Index>((c * k + u) * k + v)).data();
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const std::ptrdiff_t sy = source_index(op, oy, u);
                    if (sy < 0 || sy >= h) continue;
                    double* dst = plane + sy * w;
                    const double* src = row + oy * ow;
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const std::ptrdiff_t sx = source_index(op, ox, v);
                        if (sx >= 0 && sx < w) dst[sx] += src[ox];
                    }
                }
            }
        }
    }
    return out;
}

namespace {

using ConstBankMap = Eigen::Map<const RowMatrix>;
using BankMap = Eigen::Map<RowMatrix>;

ConstBankMap bank_matrix(const KernelBank& bank) {
    return ConstBankMap(bank.data(), static_cast<Eigen::Index>(bank.out_channels()),
                        static_cast<Eigen::Index>(bank.fan_in()));
}

} // namespace

Tensor apply_bank(const RowMatrix& cols, const KernelBank& bank, std::span<const double> bias,
                  const Shape& out_shape) {
    Tensor out(out_shape);
    BankMap result(out.data(), static_cast<Eigen::Index>(out_shape.channels),
                   static_cast<Eigen::Index>(out_shape.plane()));
    result.noalias() = bank_matrix(bank) * cols;
    for (std::size_t o = 0; o < out_shape.channels; ++o) {
        if (bias[o] == 0.0) continue;
        for (double& v : out.channel(o)) v += bias[o];
    }
    return out;
}

void accumulate_bank_gradient(const Tensor& grad_out, const RowMatrix& cols, KernelBank& grad_bank) {
    Eigen::Map<const RowMatrix> g(grad_out.data(), static_cast<Eigen::Index>(grad_out.channels()),
                                  static_cast<Eigen::Index>(grad_out.shape().plane()));
    BankMap gb(grad_bank.data(), static_cast<Eigen::Index>(grad_bank.out_channels()),
               static_cast<Eigen::Index>(grad_bank.fan_in()));
    gb.noalias() += g * cols.transpose();
}

RowMatrix column_gradient(const KernelBank& bank, const Tensor& grad_out) {
    Eigen::Map<const RowMatrix> g(grad_out.data(), static_cast<Eigen::Index>(grad_out.channels()),
                                  static_cast<Eigen::Index>(grad_out.shape().plane()));
    return bank_matrix(bank).transpose() * g;
}

void accumulate_bias_gradient(const Tensor& grad_out, std::span<double> grad_bias) {
    for (std::size_t o = 0; o < grad_out.channels(); ++o) {
        double s = 0.0;
        for (double v : grad_out.channel(o)) s += v;
        grad_bias[o] += s;
    }
}

void check_bank(const Tensor& input, const KernelBank& bank, std::span<const double> bias,
                const SpatialOp& op, const char* what) {
    if (bank.kernel() != op.kernel || op.kernel % 2 == 0) {
        throw ShapeError(std::string(what) + ": kernel size " + std::to_string(bank.kernel()) +
                         " must be odd and match the operator (" + std::to_string(op.kernel) + ")");
    }
    if (bank.in_channels() != input.channels()) {
        throw ShapeError(std::string(what) + ": kernel in-channels " +
                         std::to_string(bank.in_channels()) + " != input channels " +
                         std::to_string(input.channels()));
    }
    if (bias.size() != bank.out_channels()) {
        throw ShapeError(std::string(what) + ": bias length " + std::to_string(bias.size()) +
                         " != out-channels " + std::to_string(bank.out_channels()));
    }
}

Tensor convolve(const Tensor& input, const KernelBank& bank, std::span<const double> bias,
                const SpatialOp& op) {
    check_bank(input, bank, bias, op, "convolve");
    const Shape out_shape = op.output_shape(input.shape(), bank.out_channels());
    return apply_bank(im2col(input, op), bank, bias, out_shape);
}

Tensor conv2d(const Tensor& input, const KernelBank& kernels, std::span<const double> bias,
              PadMode pad) {
    return convolve(input, kernels, bias, SpatialOp{ConvDirection::Forward, pad, kernels.kernel()});
}

Tensor conv2d_transpose(const Tensor& input, const KernelBank& kernels,
                        std::span<const double> bias, PadMode pad) {
    return convolve(input, kernels, bias,
                    SpatialOp{ConvDirection::Transposed, pad, kernels.kernel()});
}

} // namespace qae
