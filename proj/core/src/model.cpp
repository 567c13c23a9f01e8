#include "qae/model.hpp"

#include "qae/errors.hpp"
#include "qae/rng.hpp"

#include <algorithm>

namespace qae {

std::string neuron_kind_name(NeuronKind kind) {
    return kind == NeuronKind::Quadratic ? "quadratic" : "conventional";
}

NeuronKind parse_neuron_kind(std::string_view name) {
    if (name == "quadratic") return NeuronKind::Quadratic;
    if (name == "conventional") return NeuronKind::Conventional;
    throw ArgumentError("unknown neuron kind '" + std::string(name) +
                        "' (expected quadratic or conventional)");
}

void QAEConfig::validate() const {
    if (channels == 0) throw ArgumentError("channels must be >= 1");
    if (kernel == 0 || kernel % 2 == 0) {
        throw ArgumentError("kernel size must be odd, got " + std::to_string(kernel));
    }
}

std::size_t layer_param_count(NeuronKind kind, std::size_t in_channels, std::size_t out_channels,
                              std::size_t kernel) {
    const std::size_t k2 = kernel * kernel;
    if (kind == NeuronKind::Quadratic) return out_channels * (3 * in_channels * k2 + 3);
    return out_channels * (in_channels * k2 + 1);
}

namespace {

std::vector<LayerSpec> make_specs(const QAEConfig& cfg) {
    const std::size_t c = cfg.channels;
    const std::size_t k = cfg.kernel;
    auto conv = [k](PadMode pad) { return SpatialOp{ConvDirection::Forward, pad, k}; };
    auto deconv = [k](PadMode pad) { return SpatialOp{ConvDirection::Transposed, pad, k}; };
    return {
        {"conv1", conv(PadMode::Same), 1, c},
        {"conv2", conv(PadMode::Same), c, c},
        {"conv3", conv(PadMode::Same), c, c},
        {"conv4", conv(PadMode::Same), c, c},
        {"conv5", conv(PadMode::Valid), c, c},
        {"deconv1", deconv(PadMode::Valid), c, c},
        {"deconv2", deconv(PadMode::Same), c, c},
        {"deconv3", deconv(PadMode::Same), c, c},
        {"deconv4", deconv(PadMode::Same), c, c},
        {"deconv5", deconv(PadMode::Same), c, 1},
    };
}

LayerParams make_zero_layer(NeuronKind kind, const LayerSpec& s) {
    if (kind == NeuronKind::Quadratic) {
        return QuadraticConvParams::zeros(s.out_channels, s.in_channels, s.op.kernel);
    }
    return LinearConvParams::zeros(s.out_channels, s.in_channels, s.op.kernel);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::size_t layer_parameter_count(const LayerParams& p) {
    return std::visit([](const auto& layer) { return layer.parameter_count(); }, p);
}

std::size_t count_params(const QAEConfig& config) {
    config.validate();
    std::size_t total = 0;
    for (const LayerSpec& s : make_specs(config)) {
        total += layer_param_count(config.kind, s.in_channels, s.out_channels, config.kernel);
    }
    return total;
}

void for_each_group(std::vector<LayerParams>& layers, const std::function<void(std::span<double>)>& f) {
    for (LayerParams& p : layers) {
        std::visit([&](auto& layer) { layer.for_each_group([&](auto, std::span<double> v) { f(v); }); },
                   p);
    }
}

void for_each_group(const std::vector<LayerParams>& layers,
                    const std::function<void(std::span<const double>)>& f) {
    for (const LayerParams& p : layers) {
        std::visit(
            [&](const auto& layer) {
                layer.for_each_group([&](auto, std::span<const double> v) { f(v); });
            },
            p);
    }
}

QAEModel::QAEModel(const QAEConfig& config) : config_(config) {
    config_.validate();
    specs_ = make_specs(config_);
    params_.reserve(specs_.size());
    for (const LayerSpec& s : specs_) params_.push_back(make_zero_layer(config_.kind, s));
    set_shortcuts(default_shortcuts());
}

std::vector<Shortcut> QAEModel::default_shortcuts() {
    return {{4, 5}, {2, 7}, {0, 9}};
}

// Size change (in pixels per axis) from the input to activation `index`.
long QAEModel::spatial_offset(std::size_t index) const {
    long offset = 0;
    for (std::size_t i = 0; i < index; ++i) {
        const SpatialOp& op = specs_[i].op;
        if (op.pad == PadMode::Same) continue;
        const long k = static_cast<long>(op.kernel) - 1;
        offset += op.direction == ConvDirection::Forward ? -k : k;
    }
    return offset;
}

void QAEModel::set_shortcuts(std::vector<Shortcut> shortcuts) {
    for (const Shortcut& s : shortcuts) {
        if (s.destination >= specs_.size() || s.source > s.destination) {
            throw ShapeError("shortcut " + std::to_string(s.source) + " -> " +
                             std::to_string(s.destination) + " is not a forward connection");
        }
        if (spatial_offset(s.source) != spatial_offset(s.destination + 1)) {
            throw ShapeError("shortcut " + std::to_string(s.source) + " -> " +
                             std::to_string(s.destination) + " joins maps of different spatial size");
        }
        const std::size_t src_channels = s.source == 0 ? 1 : specs_[s.source - 1].out_channels;
        if (src_channels != specs_[s.destination].out_channels) {
            throw ShapeError("shortcut into " + specs_[s.destination].name + " joins " +
                             std::to_string(src_channels) + " channels with " +
                             std::to_string(specs_[s.destination].out_channels));
        }
    }
    std::sort(shortcuts.begin(), shortcuts.end(),
              [](const Shortcut& a, const Shortcut& b) { return a.destination < b.destination; });
    shortcuts_ = std::move(shortcuts);
}

std::size_t QAEModel::count_params() const {
    std::size_t total = 0;
    for (const LayerParams& p : params_) total += layer_parameter_count(p);
    return total;
}

std::vector<LayerParams> QAEModel::zero_like() const {
    std::vector<LayerParams> out;
    out.reserve(specs_.size());
    for (const LayerSpec& s : specs_) out.push_back(make_zero_layer(config_.kind, s));
    return out;
}

void QAEModel::validate_input(const Tensor& image) const {
    if (image.channels() != 1) {
        throw ShapeError("model input must have 1 channel, got " + std::to_string(image.channels()));
    }
    // Only the unpadded bottleneck can shrink below one pixel.
    if (image.height() < config_.kernel || image.width() < config_.kernel) {
        throw ShapeError("conv5: input " + to_string(image.shape()) +
                         " is smaller than the kernel (" + std::to_string(config_.kernel) + ")");
    }
}

ForwardTrace QAEModel::trace(const Tensor& image) const {
    validate_input(image);
    ForwardTrace t;
    t.caches.reserve(specs_.size());
    t.activations.reserve(specs_.size() + 1);
    t.sums.reserve(specs_.size());
    t.activations.push_back(image);

    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const LayerSpec& spec = specs_[i];
        const Tensor& x = t.activations[i];
        Tensor pre = std::visit(
            overloaded{
                [&](const LinearConvParams& p) {
                    t.caches.emplace_back(linear_forward_cached(x, p, spec.op));
                    return std::get<LinearConvCache>(t.caches.back()).pre;
                },
                [&](const QuadraticConvParams& p) {
                    t.caches.emplace_back(quad_conv_forward_cached(x, p, spec.op));
                    return std::get<QuadraticConvCache>(t.caches.back()).pre;
                },
            },
            params_[i]);
        for (const Shortcut& s : shortcuts_) {
            if (s.destination != i) continue;
            const Tensor& skip = t.activations[s.source];
            if (skip.shape() != pre.shape()) {
                throw ShapeError(spec.name + ": shortcut from activation " + std::to_string(s.source) +
                                 " has shape " + to_string(skip.shape()) + ", expected " +
                                 to_string(pre.shape()));
            }
            add_inplace(pre, skip);
        }
        t.activations.push_back(apply_activation(config_.activation, pre));
        t.sums.push_back(std::move(pre));
    }
    return t;
}

Tensor QAEModel::forward(const Tensor& image) const { return trace(image).output(); }

ModelGradients QAEModel::backward(const ForwardTrace& trace, const Tensor& grad_output) const {
    require_same_shape(grad_output, trace.output(), "model backward");
    const std::size_t n = specs_.size();

    std::vector<Tensor> grad_act(n + 1);
    for (std::size_t i = 0; i <= n; ++i) grad_act[i] = Tensor(trace.activations[i].shape());
    grad_act[n] = grad_output;

    ModelGradients out;
    out.layers.resize(n);
    for (std::size_t idx = n; idx-- > 0;) {
        const Tensor grad_sum = mul(grad_act[idx + 1], activation_gradient(config_.activation, trace.sums[idx]));
        for (const Shortcut& s : shortcuts_) {
            if (s.destination == idx) add_inplace(grad_act[s.source], grad_sum);
        }
        const LayerSpec& spec = specs_[idx];
        std::visit(overloaded{
                       [&](const LinearConvParams& p) {
                           auto g = linear_backward_cached(std::get<LinearConvCache>(trace.caches[idx]),
                                                           p, spec.op, grad_sum);
                           add_inplace(grad_act[idx], g.input);
                           out.layers[idx] = std::move(g.params);
                       },
                       [&](const QuadraticConvParams& p) {
                           auto g = quad_conv_backward_cached(
                               std::get<QuadraticConvCache>(trace.caches[idx]), p, spec.op, grad_sum);
                           add_inplace(grad_act[idx], g.input);
                           out.layers[idx] = std::move(g.params);
                       },
                   },
                   params_[idx]);
    }
    out.input = std::move(grad_act[0]);
    return out;
}

QAEModel build_qae(const QAEConfig& config, std::uint64_t seed, const InitSpec& init) {
    QAEModel model(config);
    if (const auto* scratch = std::get_if<ScratchInit>(&init)) {
        init_scratch(model, scratch->w_b, seed, scratch->stddev);
    }
    return model;
}

void init_scratch(QAEModel& model, double w_b_const, std::uint64_t seed, double stddev) {
    Rng rng = make_rng(seed, "init");
    for (LayerParams& layer : model.params()) {
        std::visit(overloaded{
                       [&](LinearConvParams& p) {
                           for (double& v : p.w.values()) v = truncated_normal(rng, 0.0, stddev);
                           std::fill(p.b.begin(), p.b.end(), 0.0);
                       },
                       [&](QuadraticConvParams& p) {
                           for (double& v : p.w_r.values()) v = truncated_normal(rng, 0.0, stddev);
                           std::ranges::fill(p.w_g.values(), 0.0);
                           std::ranges::fill(p.w_b.values(), w_b_const);
                           std::ranges::fill(p.b_r, 0.0);
                           std::ranges::fill(p.b_g, 1.0);
                           std::ranges::fill(p.c, 0.0);
                       },
                   },
                   layer);
    }
}

namespace {

void require_same_topology(const QAEModel& a, const QAEModel& b) {
    if (a.config().channels != b.config().channels || a.config().kernel != b.config().kernel ||
        a.shortcuts() != b.shortcuts()) {
        throw ShapeError("topology mismatch: widths " + std::to_string(a.config().channels) + "/" +
                         std::to_string(b.config().channels) + ", kernels " +
                         std::to_string(a.config().kernel) + "/" + std::to_string(b.config().kernel));
    }
}

} // namespace

void init_transfer(QAEModel& model, const QAEModel& trained_conventional, const TransferOptions& options) {
    if (model.kind() != NeuronKind::Quadratic || trained_conventional.kind() != NeuronKind::Conventional) {
        throw ShapeError("weight transfer goes from a conventional model into a quadratic model");
    }
    require_same_topology(model, trained_conventional);
    for (std::size_t i = 0; i < model.params().size(); ++i) {
        QuadraticConvParams& q = model.quadratic(i);
        const LinearConvParams& src = trained_conventional.linear(i);
        q.w_r = src.w;
        q.b_r = src.b;
        std::ranges::fill(q.w_g.values(), options.literal_unit_w_g ? 1.0 : 0.0);
        std::ranges::fill(q.b_g, 1.0);
        std::ranges::fill(q.c, 0.0);
        std::ranges::fill(q.w_b.values(), options.w_b_init);
    }
}

QAEModel conventional_twin(const QAEModel& quadratic_model) {
    if (quadratic_model.kind() != NeuronKind::Quadratic) {
        throw ShapeError("conventional_twin expects a quadratic model");
    }
    QAEConfig cfg = quadratic_model.config();
    cfg.kind = NeuronKind::Conventional;
    QAEModel twin(cfg);
    twin.set_shortcuts(quadratic_model.shortcuts());
    for (std::size_t i = 0; i < twin.params().size(); ++i) {
        twin.linear(i).w = quadratic_model.quadratic(i).w_r;
        twin.linear(i).b = quadratic_model.quadratic(i).b_r;
    }
    return twin;
}

void apply_reduction(QAEModel& quadratic_model) {
    for (std::size_t i = 0; i < quadratic_model.params().size(); ++i) {
        QuadraticConvParams& q = quadratic_model.quadratic(i);
        std::ranges::fill(q.w_g.values(), 0.0);
        std::ranges::fill(q.b_g, 1.0);
        std::ranges::fill(q.w_b.values(), 0.0);
        std::ranges::fill(q.c, 0.0);
    }
}

} // namespace qae
