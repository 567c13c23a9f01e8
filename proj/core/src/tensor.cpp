#include "qae/tensor.hpp"

#include "qae/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qae {

std::string to_string(const Shape& shape) {
    return std::to_string(shape.channels) + "x" + std::to_string(shape.height) + "x" +
           std::to_string(shape.width);
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
    if (data_.size() != shape_.size()) {
        throw ShapeError("tensor of shape " + to_string(shape_) + " needs " +
                         std::to_string(shape_.size()) + " values, got " +
                         std::to_string(data_.size()));
    }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

KernelBank::KernelBank(std::size_t out_channels, std::size_t in_channels, std::size_t kernel,
                       double fill)
    : out_(out_channels), in_(in_channels), k_(kernel),
      data_(out_channels * in_channels * kernel * kernel, fill) {}

KernelBank KernelBank::swapped_channels() const {
    KernelBank t(in_, out_, k_);
    for (std::size_t o = 0; o < out_; ++o)
        for (std::size_t i = 0; i < in_; ++i)
            for (std::size_t u = 0; u < k_; ++u)
                for (std::size_t v = 0; v < k_; ++v) t(i, o, u, v) = (*this)(o, i, u, v);
    return t;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
}

namespace {

template <class F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F f) {
    require_same_shape(a, b, op);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
}

template <class F>
Tensor map(const Tensor& a, F f) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}
Tensor sub(const Tensor& a, const Tensor& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}
Tensor mul(const Tensor& a, const Tensor& b) {
    return zip(a, b, "mul", [](double x, double y) { return x * y; });
}
Tensor square(const Tensor& a) {
    return map(a, [](double x) { return x * x; });
}
Tensor scale(const Tensor& a, double factor) {
    return map(a, [factor](double x) { return x * factor; });
}
Tensor relu(const Tensor& a) {
    return map(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

void add_inplace(Tensor& acc, const Tensor& b) {
    require_same_shape(acc, b, "add");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += b[i];
}

double dot(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    return s;
}

bool all_finite(const Tensor& a) {
    return std::all_of(a.values().begin(), a.values().end(), [](double v) { return std::isfinite(v); });
}

} // namespace qae
