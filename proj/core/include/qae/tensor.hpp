#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qae {

struct Shape {
    std::size_t channels{0};
    std::size_t height{0};
    std::size_t width{0};

    constexpr std::size_t plane() const noexcept { return height * width; }
    constexpr std::size_t size() const noexcept { return channels * height * width; }

    friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

/// Dense channels x height x width array, channel-major then row-major.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor image(std::size_t height, std::size_t width, double fill = 0.0) {
        return Tensor(Shape{1, height, width}, fill);
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t channels() const noexcept { return shape_.channels; }
    std::size_t height() const noexcept { return shape_.height; }
    std::size_t width() const noexcept { return shape_.width; }

    double& operator()(std::size_t c, std::size_t y, std::size_t x) noexcept {
        return data_[(c * shape_.height + y) * shape_.width + x];
    }
    double operator()(std::size_t c, std::size_t y, std::size_t x) const noexcept {
        return data_[(c * shape_.height + y) * shape_.width + x];
    }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    std::span<double> channel(std::size_t c) noexcept {
        return std::span<double>(data_).subspan(c * shape_.plane(), shape_.plane());
    }
    std::span<const double> channel(std::size_t c) const noexcept {
        return std::span<const double>(data_).subspan(c * shape_.plane(), shape_.plane());
    }
    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    void fill(double v);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_{};
    std::vector<double> data_;
};

/// Rank-4 kernel bank [out-channels x in-channels x k x k].
class KernelBank {
public:
    KernelBank() = default;
    KernelBank(std::size_t out_channels, std::size_t in_channels, std::size_t kernel, double fill = 0.0);

    std::size_t out_channels() const noexcept { return out_; }
    std::size_t in_channels() const noexcept { return in_; }
    std::size_t kernel() const noexcept { return k_; }
    std::size_t size() const noexcept { return data_.size(); }
    /// Number of weights feeding one output channel (in * k * k).
    std::size_t fan_in() const noexcept { return in_ * k_ * k_; }

    double& operator()(std::size_t o, std::size_t i, std::size_t u, std::size_t v) noexcept {
        return data_[((o * in_ + i) * k_ + u) * k_ + v];
    }
    double operator()(std::size_t o, std::size_t i, std::size_t u, std::size_t v) const noexcept {
        return data_[((o * in_ + i) * k_ + u) * k_ + v];
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    /// Same weights with the in/out channel axes swapped.
    KernelBank swapped_channels() const;

    bool same_shape(const KernelBank& other) const noexcept {
        return out_ == other.out_ && in_ == other.in_ && k_ == other.k_;
    }

    friend bool operator==(const KernelBank&, const KernelBank&) = default;

private:
    std::size_t out_{0};
    std::size_t in_{0};
    std::size_t k_{0};
    std::vector<double> data_;
};

// Elementwise arithmetic. Binary forms throw ShapeError on mismatched shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor square(const Tensor& a);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& a);

void add_inplace(Tensor& acc, const Tensor& b);

/// Inner product accumulated in index order.
double dot(const Tensor& a, const Tensor& b);
double sum(const Tensor& a);
bool all_finite(const Tensor& a);

void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

} // namespace qae
