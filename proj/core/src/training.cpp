#include "qae/training.hpp"

#include "qae/errors.hpp"
#include "qae/metrics.hpp"
#include "qae/rng.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace qae {

LossAndGradient mse_loss(const Tensor& prediction, const Tensor& target) {
    require_same_shape(prediction, target, "mse_loss");
    LossAndGradient out{0.0, Tensor(prediction.shape())};
    if (prediction.size() == 0) return out;
    const double n = static_cast<double>(prediction.size());
    double s = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double d = prediction[i] - target[i];
        s += d * d;
        out.gradient[i] = 2.0 * d / n;
    }
    out.loss = s / n;
    return out;
}

AdamState AdamState::for_groups(std::span<const std::span<double>> params) {
    AdamState s;
    for (const auto& p : params) {
        s.m.emplace_back(p.size(), 0.0);
        s.v.emplace_back(p.size(), 0.0);
    }
    return s;
}

void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, double lr, const AdamHyper& hyper, const std::vector<bool>& active) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("adam_step: parameter, gradient and state group counts differ");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(hyper.beta1, t);
    const double correction2 = 1.0 - std::pow(hyper.beta2, t);
    for (std::size_t gi = 0; gi < params.size(); ++gi) {
        if (!active.empty() && !active[gi]) continue;
        std::span<double> p = params[gi];
        std::span<const double> g = grads[gi];
        std::vector<double>& m = state.m[gi];
        std::vector<double>& v = state.v[gi];
        if (g.size() != p.size() || m.size() != p.size()) {
            throw ShapeError("adam_step: group " + std::to_string(gi) + " size mismatch");
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
            v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
        }
    }
}

LrSchedule LrSchedule::standard(std::size_t epochs) {
    if (epochs <= 10) return LrSchedule({{1, epochs, 4e-4}});
    return LrSchedule({{1, 10, 4e-4}, {11, epochs, 2e-4}});
}

LrSchedule LrSchedule::constant(double rate, std::size_t epochs) { return LrSchedule({{1, epochs, rate}}); }

namespace {

std::size_t parse_size(std::string_view s, std::string_view context) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ArgumentError("bad integer '" + std::string(s) + "' in " + std::string(context));
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace

LrSchedule LrSchedule::parse(std::string_view text) {
    std::vector<LrPhase> phases;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string_view item =
            trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        const std::size_t colon = item.find(':');
        const std::size_t dash = item.find('-');
        if (colon == std::string_view::npos || dash == std::string_view::npos || dash > colon) {
            throw ArgumentError("learning-rate phase '" + std::string(item) + "' is not FIRST-LAST:RATE");
        }
        LrPhase ph{};
        ph.first_epoch = parse_size(trim(item.substr(0, dash)), "lr schedule");
        ph.last_epoch = parse_size(trim(item.substr(dash + 1, colon - dash - 1)), "lr schedule");
        const std::string rate(trim(item.substr(colon + 1)));
        try {
            std::size_t used = 0;
            ph.rate = std::stod(rate, &used);
            if (used != rate.size()) throw std::invalid_argument(rate);
        } catch (const std::exception&) {
            throw ArgumentError("bad learning rate '" + rate + "'");
        }
        phases.push_back(ph);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return LrSchedule(std::move(phases));
}

std::string LrSchedule::to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < phases_.size(); ++i) {
        if (i) out << ',';
        out << phases_[i].first_epoch << '-' << phases_[i].last_epoch << ':' << format_number(phases_[i].rate);
    }
    return out.str();
}

double LrSchedule::rate(std::size_t epoch) const {
    for (const LrPhase& p : phases_) {
        if (epoch >= p.first_epoch && epoch <= p.last_epoch) return p.rate;
    }
    throw ArgumentError("no learning rate scheduled for epoch " + std::to_string(epoch));
}

void LrSchedule::validate(std::size_t epochs) const {
    std::size_t next = 1;
    for (const LrPhase& p : phases_) {
        if (!(p.rate > 0.0) || !std::isfinite(p.rate)) {
            throw ArgumentError("learning rates must be positive, got " + format_number(p.rate));
        }
        if (p.first_epoch != next || p.last_epoch < p.first_epoch) {
            throw ArgumentError("learning-rate phases must tile epochs 1.." + std::to_string(epochs) +
                                " in order without gaps or overlap (" + to_string() + ")");
        }
        next = p.last_epoch + 1;
    }
    if (next != epochs + 1) {
        throw ArgumentError("learning-rate schedule " + to_string() + " does not cover epochs 1.." +
                            std::to_string(epochs));
    }
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw ArgumentError("batch size must be >= 1");
    if (epochs == 0) throw ArgumentError("epochs must be >= 1");
    schedule.validate(epochs);
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested != 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::min(resolve_threads(threads), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < n; i += threads) fn(i);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

std::vector<std::span<double>> group_spans(std::vector<LayerParams>& layers) {
    std::vector<std::span<double>> out;
    for_each_group(layers, [&](std::span<double> v) { out.push_back(v); });
    return out;
}

std::vector<std::span<const double>> const_group_spans(const std::vector<LayerParams>& layers) {
    std::vector<std::span<const double>> out;
    for_each_group(layers, [&](std::span<const double> v) { out.push_back(v); });
    return out;
}

std::vector<bool> active_groups(const QAEModel& model, const std::set<ParamGroup>& frozen) {
    std::vector<bool> active;
    for (const LayerParams& layer : model.params()) {
        if (std::holds_alternative<QuadraticConvParams>(layer)) {
            for (ParamGroup g : QuadraticConvParams::kGroups) active.push_back(!frozen.contains(g));
        } else {
            active.push_back(true);
            active.push_back(true);
        }
    }
    return active;
}

void accumulate(std::vector<LayerParams>& acc, const std::vector<LayerParams>& g) {
    auto a = group_spans(acc);
    auto b = const_group_spans(g);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
}

// The im2col buffers are large and short-lived. Left to the default
// thresholds, glibc serves each from a fresh mmap and the run is dominated
// by page faults.
void tune_allocator() {
#if defined(__GLIBC__)
    static std::once_flag once;
    std::call_once(once, [] {
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, 1 << 30);
    });
#endif
}

void require_uniform(std::span<const PatchPair> set, const char* name) {
    if (set.empty()) throw ArgumentError(std::string(name) + " set is empty");
    const Shape s = set.front().noisy.shape();
    for (const PatchPair& p : set) {
        if (p.noisy.shape() != s || p.clean.shape() != s) {
            throw ArgumentError(std::string(name) + " patches must share one shape (" + to_string(s) + ")");
        }
        if (!all_finite(p.noisy) || !all_finite(p.clean)) {
            throw ArgumentError(std::string(name) + " set contains a non-finite value");
        }
    }
}

} // namespace

double sample_gradient(const QAEModel& model, const Tensor& input, const Tensor& target,
                       std::vector<LayerParams>& acc) {
    const ForwardTrace t = model.trace(input);
    const LossAndGradient lg = mse_loss(t.output(), target);
    accumulate(acc, model.backward(t, lg.gradient).layers);
    return lg.loss;
}

double evaluate_loss(const QAEModel& model, std::span<const PatchPair> patches, std::size_t threads) {
    std::vector<double> losses(patches.size());
    parallel_for(patches.size(), threads, [&](std::size_t i) {
        losses[i] = mse_loss(model.forward(patches[i].noisy), patches[i].clean).loss;
    });
    double s = 0.0;
    for (double l : losses) s += l;
    return patches.empty() ? 0.0 : s / static_cast<double>(patches.size());
}

TrainResult train(QAEModel model, std::span<const PatchPair> train_set, std::span<const PatchPair> val_set,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    require_uniform(train_set, "training");
    tune_allocator();
    require_uniform(val_set, "validation");
    const std::size_t threads = resolve_threads(config.threads);

    TrainResult result{{}, model, 0, 0, false, {}};
    const std::vector<bool> active = active_groups(model, config.frozen);
    auto params = group_spans(model.params());
    AdamState adam = AdamState::for_groups(params);

    auto fail = [&](std::size_t epoch, std::size_t batch, const std::string& what) {
        const std::string msg = "training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batch) + ": " + what;
        if (config.on_divergence == DivergencePolicy::Throw) throw DivergenceError(epoch, batch, msg);
        result.diverged = true;
        result.divergence = msg;
    };

    const EpochRecord initial{0, evaluate_loss(model, train_set, threads), evaluate_loss(model, val_set, threads)};
    result.history.push_back(initial);
    if (on_epoch) on_epoch(initial);
    if (!std::isfinite(initial.val_loss) || !std::isfinite(initial.train_loss)) {
        fail(0, 0, "initial loss is not finite");
        return result;
    }

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_rng(config.seed, "shuffle");
    double best_val = std::numeric_limits<double>::infinity();
    const std::size_t n = train_set.size();

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
        const double lr = config.schedule.rate(epoch);
        double epoch_loss = 0.0;

        for (std::size_t begin = 0, batch = 1; begin < n; begin += config.batch_size, ++batch) {
            const std::size_t count = std::min(config.batch_size, n - begin);
            std::vector<LayerParams> grads = model.zero_like();
            double batch_loss = 0.0;

            // Waves of `threads` samples; per-sample results are folded in
            // sample order so the sum does not depend on the thread count.
            for (std::size_t wave = 0; wave < count; wave += threads) {
                const std::size_t width = std::min(threads, count - wave);
                if (width == 1) {
                    const PatchPair& p = train_set[order[begin + wave]];
                    batch_loss += sample_gradient(model, p.noisy, p.clean, grads);
                    continue;
                }
                std::vector<std::vector<LayerParams>> slots(width, model.zero_like());
                std::vector<double> losses(width);
                parallel_for(width, width, [&](std::size_t s) {
                    const PatchPair& p = train_set[order[begin + wave + s]];
                    losses[s] = sample_gradient(model, p.noisy, p.clean, slots[s]);
                });
                for (std::size_t s = 0; s < width; ++s) {
                    batch_loss += losses[s];
                    accumulate(grads, slots[s]);
                }
            }

            const double inv = 1.0 / static_cast<double>(count);
            batch_loss *= inv;
            if (!std::isfinite(batch_loss)) {
                fail(epoch, batch, "minibatch loss is " + format_number(batch_loss));
                return result;
            }
            auto grad_spans = group_spans(grads);
            for (auto& g : grad_spans)
                for (double& v : g) v *= inv;
            std::vector<std::span<const double>> const_grads(grad_spans.begin(), grad_spans.end());
            adam_step(params, const_grads, adam, lr, config.adam, active);
            ++result.optimizer_steps;
            epoch_loss += batch_loss * static_cast<double>(count);
        }

        const EpochRecord rec{epoch, epoch_loss / static_cast<double>(n), evaluate_loss(model, val_set, threads)};
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (!std::isfinite(rec.val_loss)) {
            fail(epoch, 0, "validation loss is " + format_number(rec.val_loss));
            return result;
        }
        if (rec.val_loss < best_val) {
            best_val = rec.val_loss;
            result.best = model;
            result.best_epoch = epoch;
        }
    }
    return result;
}

std::string history_csv(std::span<const EpochRecord> history) {
    std::string out = std::string(kHistoryCsvHeader) + "\n";
    for (const EpochRecord& r : history) {
        out += std::to_string(r.epoch) + "," + format_number(r.train_loss) + "," + format_number(r.val_loss) + "\n";
    }
    return out;
}

GradCheckReport grad_check(const QAEModel& model, const Tensor& probe, const Tensor& target,
                           const GradCheckOptions& options) {
    GradCheckReport report;
    const ForwardTrace t = model.trace(probe);
    report.min_preactivation_margin = std::numeric_limits<double>::infinity();
    for (const Tensor& s : t.sums)
        for (double v : s.values()) report.min_preactivation_margin = std::min(report.min_preactivation_margin, std::abs(v));

    const LossAndGradient lg = mse_loss(t.output(), target);
    std::vector<LayerParams> analytic = model.backward(t, lg.gradient).layers;
    const auto analytic_groups = const_group_spans(analytic);

    // Candidate (group, index) pairs, skipping excluded quadratic groups.
    QAEModel probe_model = model;
    auto groups = group_spans(probe_model.params());
    std::vector<bool> allowed = active_groups(model, options.exclude);
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (!allowed[g]) continue;
        for (std::size_t i = 0; i < groups[g].size(); ++i) candidates.emplace_back(g, i);
    }
    Rng rng = make_rng(options.seed, "grad-check");
    if (candidates.size() > options.samples) {
        std::shuffle(candidates.begin(), candidates.end(), rng);
        candidates.resize(options.samples);
    }

    for (const auto& [g, i] : candidates) {
        const double original = groups[g][i];
        groups[g][i] = original + options.step;
        const double up = mse_loss(probe_model.forward(probe), target).loss;
        groups[g][i] = original - options.step;
        const double down = mse_loss(probe_model.forward(probe), target).loss;
        groups[g][i] = original;

        const double numeric = (up - down) / (2.0 * options.step);
        const double a = analytic_groups[g][i];
        const double abs_err = std::abs(a - numeric);
        const double rel = abs_err == 0.0 ? 0.0 : abs_err / std::max({std::abs(a), std::abs(numeric), options.floor});
        report.max_analytic = std::max(report.max_analytic, std::abs(a));
        report.max_numeric = std::max(report.max_numeric, std::abs(numeric));
        report.max_abs_error = std::max(report.max_abs_error, abs_err);
        if (rel > report.max_relative_error || report.worst.empty()) {
            if (rel >= report.max_relative_error) {
                report.max_relative_error = rel;
                report.worst = "group " + std::to_string(g) + " index " + std::to_string(i) + ": analytic " +
                               format_number(a) + " numeric " + format_number(numeric);
            }
        }
        ++report.checked;
    }
    return report;
}

} // namespace qae
