#pragma once

// The 10-layer convolutional autoencoder: five convolutions (the fifth
// unpadded, the bottleneck) mirrored by five transposed convolutions (the
// first unpadded), with three residual shortcuts
//
//     conv4 output -> deconv1,  conv2 output -> deconv3,  input -> deconv5.
//
// A shortcut is added to the destination layer's pre-activation and the
// activation is applied after the sum. Every layer uses either quadratic or
// conventional neurons.

#include "qae/activation.hpp"
#include "qae/linear_layer.hpp"
#include "qae/quadratic.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace qae {

enum class NeuronKind : std::uint8_t { Conventional = 0, Quadratic = 1 };

std::string neuron_kind_name(NeuronKind kind);
NeuronKind parse_neuron_kind(std::string_view name);

struct QAEConfig {
    std::size_t channels{15};
    std::size_t kernel{3};
    NeuronKind kind{NeuronKind::Quadratic};
    Activation activation{Activation::relu()};

    /// Throws ArgumentError for channels == 0 or an even kernel.
    void validate() const;

    friend bool operator==(const QAEConfig&, const QAEConfig&) = default;
};

inline constexpr std::size_t kQAELayers = 10;

struct LayerSpec {
    std::string name;
    SpatialOp op;
    std::size_t in_channels;
    std::size_t out_channels;
};

/// Adds activation `source` (0 = input image, i = output of layer i, 1-based)
/// into the pre-activation of 0-based layer `destination`.
struct Shortcut {
    std::size_t source;
    std::size_t destination;

    friend bool operator==(const Shortcut&, const Shortcut&) = default;
};

using LayerParams = std::variant<LinearConvParams, QuadraticConvParams>;
using LayerCache = std::variant<LinearConvCache, QuadraticConvCache>;

std::size_t layer_parameter_count(const LayerParams& p);

struct ForwardTrace {
    std::vector<LayerCache> caches;
    /// activations[0] is the input; activations[i] the output of layer i.
    std::vector<Tensor> activations;
    /// Pre-activation of each layer after any shortcut has been added.
    std::vector<Tensor> sums;

    const Tensor& output() const { return activations.back(); }
};

struct ModelGradients {
    std::vector<LayerParams> layers;
    Tensor input;
};

/// Calls f(values) for each parameter group of the given layer list, in checkpoint order.
void for_each_group(std::vector<LayerParams>& layers, const std::function<void(std::span<double>)>& f);
void for_each_group(const std::vector<LayerParams>& layers,
                    const std::function<void(std::span<const double>)>& f);

class QAEModel {
public:
    /// Zero-initialized model with the standard layer and shortcut layout.
    explicit QAEModel(const QAEConfig& config);

    const QAEConfig& config() const noexcept { return config_; }
    NeuronKind kind() const noexcept { return config_.kind; }
    const Activation& activation() const noexcept { return config_.activation; }
    void set_activation(const Activation& act) { config_.activation = act; }

    const std::vector<LayerSpec>& layers() const noexcept { return specs_; }
    const std::vector<LayerParams>& params() const noexcept { return params_; }
    std::vector<LayerParams>& params() noexcept { return params_; }

    LinearConvParams& linear(std::size_t layer) { return std::get<LinearConvParams>(params_.at(layer)); }
    const LinearConvParams& linear(std::size_t layer) const {
        return std::get<LinearConvParams>(params_.at(layer));
    }
    QuadraticConvParams& quadratic(std::size_t layer) {
        return std::get<QuadraticConvParams>(params_.at(layer));
    }
    const QuadraticConvParams& quadratic(std::size_t layer) const {
        return std::get<QuadraticConvParams>(params_.at(layer));
    }

    const std::vector<Shortcut>& shortcuts() const noexcept { return shortcuts_; }
    /// Replaces the shortcut table; throws ShapeError if a join would be channel-illegal.
    void set_shortcuts(std::vector<Shortcut> shortcuts);
    static std::vector<Shortcut> default_shortcuts();

    std::size_t count_params() const;

    Tensor forward(const Tensor& image) const;
    ForwardTrace trace(const Tensor& image) const;
    /// Backpropagates dL/d(output) through a trace produced by this model.
    ModelGradients backward(const ForwardTrace& trace, const Tensor& grad_output) const;

    /// Gradient container with the same layout as params(), all zeros.
    std::vector<LayerParams> zero_like() const;

    friend bool operator==(const QAEModel& a, const QAEModel& b) {
        return a.config_ == b.config_ && a.params_ == b.params_ && a.shortcuts_ == b.shortcuts_;
    }

private:
    void validate_input(const Tensor& image) const;
    long spatial_offset(std::size_t activation_index) const;

    QAEConfig config_;
    std::vector<LayerSpec> specs_;
    std::vector<LayerParams> params_;
    std::vector<Shortcut> shortcuts_;
};

/// Trainable parameters of one layer.
std::size_t layer_param_count(NeuronKind kind, std::size_t in_channels, std::size_t out_channels,
                              std::size_t kernel);
/// count_params of a model with this config, without building it.
std::size_t count_params(const QAEConfig& config);

struct ZeroInit {};

/// Random-start initialization: w_r ~ truncated normal, w_g = 0, b_g = 1,
/// b_r = c = 0, w_b = constant. Conventional layers draw W the same way, b = 0.
struct ScratchInit {
    double w_b{0.0};
    double stddev{0.01};
};

using InitSpec = std::variant<ZeroInit, ScratchInit>;

QAEModel build_qae(const QAEConfig& config, std::uint64_t seed, const InitSpec& init = ScratchInit{});

void init_scratch(QAEModel& model, double w_b_const, std::uint64_t seed, double stddev = 0.01);

struct TransferOptions {
    double w_b_init{0.0};
    /// w_g = 1 as printed in the weight-transfer formula, instead of the
    /// function-preserving w_g = 0.
    bool literal_unit_w_g{false};
};

/// Initializes a quadratic model from a trained conventional model of identical
/// topology: w_r = W, b_r = b, w_g = 0 (or 1), b_g = 1, c = 0, w_b = constant.
void init_transfer(QAEModel& model, const QAEModel& trained_conventional,
                   const TransferOptions& options = {});

/// Conventional model computing exactly what a quadratic model computes when
/// every layer is in the reduction configuration (w_r, b_r copied).
QAEModel conventional_twin(const QAEModel& quadratic_model);

/// Sets w_g = 0, b_g = 1, w_b = 0, c = 0 in every layer, keeping w_r, b_r.
void apply_reduction(QAEModel& quadratic_model);

} // namespace qae
