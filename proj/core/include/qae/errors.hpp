#pragma once

#include <stdexcept>
#include <string>

namespace qae {

/// Tensor or parameter shapes do not line up.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed checkpoint / image / config bytes.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument is outside its documented domain.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t epoch, std::size_t batch, const std::string& what)
        : std::runtime_error(what), epoch_(epoch), batch_(batch) {}

    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
};

} // namespace qae
