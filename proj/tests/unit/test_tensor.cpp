#include "oracles.hpp"

#include "qae/conv.hpp"
#include "qae/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qae;

namespace {

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

double relative(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

} // namespace

TEST(Conv2d, ValidAllOnesSumsEveryEntry) {
    Tensor x(Shape{1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    KernelBank k(1, 1, 3, 1.0);
    Tensor y = conv2d(x, k, zeros(1), PadMode::Valid);
    ASSERT_EQ(y.shape(), (Shape{1, 1, 1}));
    EXPECT_EQ(y[0], 45.0);
}

TEST(Conv2d, UnitKernelIsIdentity) {
    std::mt19937_64 rng(3);
    Tensor x = oracle::random_tensor({1, 6, 5}, rng);
    KernelBank k(1, 1, 1, 1.0);
    EXPECT_EQ(conv2d(x, k, zeros(1), PadMode::Same), x);
}

TEST(Conv2d, SamePreservesSpatialSize) {
    std::mt19937_64 rng(4);
    Tensor x = oracle::random_tensor({1, 5, 5}, rng);
    KernelBank k = oracle::random_bank(1, 1, 3, rng);
    EXPECT_EQ(conv2d(x, k, zeros(1), PadMode::Same).shape(), (Shape{1, 5, 5}));
}

TEST(Conv2d, RejectsChannelMismatch) {
    Tensor x(Shape{2, 4, 4});
    KernelBank k(1, 3, 3);
    EXPECT_THROW(conv2d(x, k, zeros(1), PadMode::Same), ShapeError);
    EXPECT_THROW(conv2d_transpose(x, k, zeros(1), PadMode::Same), ShapeError);
    EXPECT_THROW(conv2d(Tensor(Shape{3, 4, 4}), k, zeros(2), PadMode::Same), ShapeError);
}

TEST(Conv2d, MatchesDirectLoopsForBothPadModes) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = 1 + trial % 3, out = 1 + (trial / 3) % 3, k = trial % 2 ? 3 : 5;
        Tensor x = oracle::random_tensor({in, 6 + trial % 3, 7}, rng);
        KernelBank bank = oracle::random_bank(out, in, k, rng);
        auto bias = oracle::random_vector(out, rng);
        for (bool same : {true, false}) {
            Tensor got = conv2d(x, bank, bias, same ? PadMode::Same : PadMode::Valid);
            Tensor want = oracle::direct_conv(x, bank, bias, same);
            ASSERT_EQ(got.shape(), want.shape());
            for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
        }
    }
}

TEST(Conv2dTranspose, SinglePixelStampsKernel) {
    std::mt19937_64 rng(6);
    KernelBank k = oracle::random_bank(1, 1, 3, rng);
    Tensor x(Shape{1, 1, 1}, {2.5});
    Tensor y = conv2d_transpose(x, k, zeros(1), PadMode::Valid);
    ASSERT_EQ(y.shape(), (Shape{1, 3, 3}));
    for (std::size_t u = 0; u < 3; ++u)
        for (std::size_t v = 0; v < 3; ++v) EXPECT_DOUBLE_EQ(y(0, u, v), 2.5 * k(0, 0, u, v));
}

TEST(Conv2dTranspose, MatchesExplicitScatter) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = 1 + trial % 2, out = 1 + trial % 3;
        Tensor x = oracle::random_tensor({in, 3 + trial % 4, 5}, rng);
        KernelBank bank = oracle::random_bank(out, in, 3, rng);
        auto bias = oracle::random_vector(out, rng);
        for (bool same : {true, false}) {
            Tensor got = conv2d_transpose(x, bank, bias, same ? PadMode::Same : PadMode::Valid);
            Tensor want = oracle::direct_conv_transpose(x, bank, bias, same);
            ASSERT_EQ(got.shape(), want.shape());
            for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
        }
    }
}

// <conv(x, K), y> == <x, convT(y, K with in/out swapped)>
TEST(Conv2dTranspose, IsTheAdjointOfConv2d) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t in = 1 + trial % 2, out = 1 + (trial / 2) % 2;
        const std::size_t h = 4 + trial % 3, w = 4 + (trial / 3) % 3;
        for (PadMode pad : {PadMode::Same, PadMode::Valid}) {
            Tensor x = oracle::random_tensor({in, h, w}, rng);
            KernelBank k = oracle::random_bank(out, in, 3, rng);
            Tensor cx = conv2d(x, k, zeros(out), pad);
            Tensor y = oracle::random_tensor(cx.shape(), rng);
            Tensor ty = conv2d_transpose(y, k.swapped_channels(), zeros(in), pad);
            ASSERT_EQ(ty.shape(), x.shape());
            EXPECT_LT(relative(dot(cx, y), dot(x, ty)), 1e-12);
        }
    }
}

TEST(Conv2d, IsLinearWithoutBias) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = oracle::random_tensor({2, 5, 5}, rng);
        Tensor y = oracle::random_tensor({2, 5, 5}, rng);
        KernelBank k = oracle::random_bank(3, 2, 3, rng);
        const double a = 0.7 - trial * 0.1, b = -1.3 + trial * 0.05;
        for (PadMode pad : {PadMode::Same, PadMode::Valid}) {
            Tensor lhs = conv2d(add(scale(x, a), scale(y, b)), k, zeros(3), pad);
            Tensor rhs = add(scale(conv2d(x, k, zeros(3), pad), a), scale(conv2d(y, k, zeros(3), pad), b));
            for (std::size_t i = 0; i < lhs.size(); ++i) {
                EXPECT_LE(std::abs(lhs[i] - rhs[i]), 1e-12 * std::max(1.0, std::abs(rhs[i])));
            }
        }
    }
}

TEST(Conv2d, ShapeAlgebraExhaustiveForKernel3) {
    KernelBank k(1, 1, 3, 0.5);
    for (std::size_t h = 1; h <= 8; ++h) {
        for (std::size_t w = 1; w <= 8; ++w) {
            Tensor x(Shape{1, h, w}, 1.0);
            EXPECT_EQ(conv2d(x, k, zeros(1), PadMode::Same).shape(), (Shape{1, h, w}));
            EXPECT_EQ(conv2d_transpose(x, k, zeros(1), PadMode::Same).shape(), (Shape{1, h, w}));
            EXPECT_EQ(conv2d_transpose(x, k, zeros(1), PadMode::Valid).shape(), (Shape{1, h + 2, w + 2}));
            if (h >= 3 && w >= 3) {
                EXPECT_EQ(conv2d(x, k, zeros(1), PadMode::Valid).shape(), (Shape{1, h - 2, w - 2}));
            } else {
                EXPECT_THROW(conv2d(x, k, zeros(1), PadMode::Valid), ShapeError);
            }
        }
    }
}

TEST(Elementwise, Basics) {
    Tensor v(Shape{1, 1, 2}, {2, -3});
    EXPECT_EQ(square(v), Tensor(Shape{1, 1, 2}, {4, 9}));

    std::mt19937_64 rng(10);
    Tensor x = oracle::random_tensor({2, 3, 3}, rng);
    EXPECT_EQ(add(x, Tensor(x.shape(), 0.0)), x);
    EXPECT_EQ(mul(x, Tensor(x.shape(), 1.0)), x);
    EXPECT_EQ(sub(x, x), Tensor(x.shape(), 0.0));
    EXPECT_THROW(add(x, Tensor(Shape{1, 3, 3})), ShapeError);
    EXPECT_THROW(mul(x, Tensor(Shape{2, 3, 2})), ShapeError);
}

TEST(Elementwise, Relu) {
    EXPECT_EQ(relu(Tensor(Shape{1, 1, 3}, {-1, 0, 2})), Tensor(Shape{1, 1, 3}, {0, 0, 2}));
    Tensor pos(Shape{1, 2, 2}, {0, 1, 2, 3});
    EXPECT_EQ(relu(pos), pos);
    EXPECT_EQ(relu(Tensor(Shape{1, 2, 2}, -0.5)), Tensor(Shape{1, 2, 2}, 0.0));
}

TEST(Tensor, RejectsWrongValueCount) {
    EXPECT_THROW(Tensor(Shape{1, 2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Tensor, OperationsKeepFiniteInputsFinite) {
    std::mt19937_64 rng(11);
    Tensor x = oracle::random_tensor({2, 6, 6}, rng, -1e3, 1e3);
    KernelBank k = oracle::random_bank(2, 2, 3, rng);
    EXPECT_TRUE(all_finite(conv2d(x, k, zeros(2), PadMode::Same)));
    EXPECT_TRUE(all_finite(conv2d_transpose(x, k, zeros(2), PadMode::Valid)));
    EXPECT_TRUE(all_finite(square(x)));
}
