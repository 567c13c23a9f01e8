#pragma once

// Stride-1 2-D convolution and its transpose.
//
// Both directions are written as a gather ("im2col") followed by a GEMM with
// the kernel bank, so their backward passes share one code path: the adjoint
// of a gather is a scatter-add ("col2im").
//
//   forward     out[o, p] = sum_{i,u,v} K[o,i,u,v] * in[i, p + (u,v) - pad]
//   transposed  out[o, q] = sum_{i,u,v} K[o,i,u,v] * in[i, q - (u,v) + pad]
//
// pad is (k-1)/2 for Same and 0 for Valid. Cross-correlation orientation: no
// kernel flip in the forward direction.

#include "qae/tensor.hpp"

#include <Eigen/Core>

#include <span>

namespace qae {

enum class PadMode { Same, Valid };
enum class ConvDirection { Forward, Transposed };

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SpatialOp {
    ConvDirection direction{ConvDirection::Forward};
    PadMode pad{PadMode::Same};
    std::size_t kernel{3};

    std::size_t padding() const noexcept { return pad == PadMode::Same ? (kernel - 1) / 2 : 0; }
    /// Output extent along one axis; throws ShapeError when a Valid forward
    /// convolution would be empty.
    std::size_t output_extent(std::size_t in) const;
    Shape output_shape(const Shape& in, std::size_t out_channels) const;

    friend bool operator==(const SpatialOp&, const SpatialOp&) = default;
};

/// Gathered input patches: rows (channel, u, v), columns output positions.
RowMatrix im2col(const Tensor& input, const SpatialOp& op);

/// Adjoint of im2col: scatter-adds columns back into a tensor of `input_shape`.
Tensor col2im(const RowMatrix& cols, const SpatialOp& op, const Shape& input_shape);

/// bank * cols + bias, reshaped to `out_shape`.
Tensor apply_bank(const RowMatrix& cols, const KernelBank& bank, std::span<const double> bias,
                  const Shape& out_shape);

/// Accumulates grad_out * cols^T into `grad_bank` (same layout as the bank).
void accumulate_bank_gradient(const Tensor& grad_out, const RowMatrix& cols, KernelBank& grad_bank);

/// bank^T * grad_out: gradient with respect to the gathered columns.
RowMatrix column_gradient(const KernelBank& bank, const Tensor& grad_out);

/// Sum of each channel of grad_out, added into `grad_bias`.
void accumulate_bias_gradient(const Tensor& grad_out, std::span<double> grad_bias);

void check_bank(const Tensor& input, const KernelBank& bank, std::span<const double> bias,
                const SpatialOp& op, const char* what);

Tensor convolve(const Tensor& input, const KernelBank& bank, std::span<const double> bias,
                const SpatialOp& op);

Tensor conv2d(const Tensor& input, const KernelBank& kernels, std::span<const double> bias,
              PadMode pad);

/// Exact adjoint of conv2d under the same PadMode, with bias added after the scatter.
/// `kernels` is indexed [out-channel][in-channel] of the transposed operator.
Tensor conv2d_transpose(const Tensor& input, const KernelBank& kernels,
                        std::span<const double> bias, PadMode pad);

} // namespace qae
