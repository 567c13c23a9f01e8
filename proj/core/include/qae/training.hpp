#pragma once

#include "qae/data.hpp"
#include "qae/model.hpp"

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qae {

struct LossAndGradient {
    double loss;
    Tensor gradient;
};

/// Mean squared error and its gradient 2 (pred - target) / N.
LossAndGradient mse_loss(const Tensor& prediction, const Tensor& target);

struct AdamHyper {
    double beta1{0.9};
    double beta2{0.999};
    double epsilon{1e-8};
};

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t step{0};

    /// Zero moments shaped like the given parameter groups.
    static AdamState for_groups(std::span<const std::span<double>> params);
};

/// One bias-corrected Adam update. Groups whose entry in `active` is false
/// (when `active` is non-empty) are left untouched, moments included.
void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, double lr, const AdamHyper& hyper = {},
               const std::vector<bool>& active = {});

/// Epoch ranges are 1-based and inclusive.
struct LrPhase {
    std::size_t first_epoch;
    std::size_t last_epoch;
    double rate;

    friend bool operator==(const LrPhase&, const LrPhase&) = default;
};

class LrSchedule {
public:
    LrSchedule() = default;
    explicit LrSchedule(std::vector<LrPhase> phases) : phases_(std::move(phases)) {}

    /// 4e-4 for epochs 1-10 and 2e-4 afterwards.
    static LrSchedule standard(std::size_t epochs);
    static LrSchedule constant(double rate, std::size_t epochs);
    /// "1-10:4e-4,11-30:2e-4"
    static LrSchedule parse(std::string_view text);

    std::string to_string() const;
    double rate(std::size_t epoch) const;
    /// Throws ArgumentError unless the phases tile 1..epochs exactly with positive rates.
    void validate(std::size_t epochs) const;

    const std::vector<LrPhase>& phases() const noexcept { return phases_; }

    friend bool operator==(const LrSchedule&, const LrSchedule&) = default;

private:
    std::vector<LrPhase> phases_;
};

enum class DivergencePolicy { Throw, Record };

struct TrainConfig {
    std::size_t batch_size{50};
    std::size_t epochs{30};
    LrSchedule schedule{LrSchedule::standard(30)};
    AdamHyper adam{};
    std::uint64_t seed{0};
    bool shuffle{true};
    /// Quadratic parameter groups held at their initial values.
    std::set<ParamGroup> frozen;
    /// Worker threads for per-sample gradients; 0 = hardware concurrency.
    /// Results do not depend on this value.
    std::size_t threads{0};
    DivergencePolicy on_divergence{DivergencePolicy::Throw};

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch;
    double train_loss;
    double val_loss;
};

struct TrainResult {
    /// Row 0 holds the losses of the initial model; row e the mean minibatch
    /// loss of epoch e and the validation loss after it.
    std::vector<EpochRecord> history;
    QAEModel best;
    std::size_t best_epoch{0};
    std::size_t optimizer_steps{0};
    bool diverged{false};
    std::string divergence;

    double initial_val_loss() const { return history.front().val_loss; }
    double final_val_loss() const { return history.back().val_loss; }
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minibatch Adam on the MSE objective. Returns the model with the lowest
/// validation loss over epochs 1..E (epoch 0 if training diverged first).
/// Throws DivergenceError on a non-finite loss unless the policy is Record.
TrainResult train(QAEModel model, std::span<const PatchPair> train_set, std::span<const PatchPair> val_set,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Mean per-patch MSE of the model's prediction for `noisy` against `clean`.
double evaluate_loss(const QAEModel& model, std::span<const PatchPair> patches, std::size_t threads = 0);

inline constexpr const char* kHistoryCsvHeader = "epoch,train_loss,val_loss";
std::string history_csv(std::span<const EpochRecord> history);

/// Loss gradient of one (input, target) pair, summed into `acc` if provided.
double sample_gradient(const QAEModel& model, const Tensor& input, const Tensor& target,
                       std::vector<LayerParams>& acc);

struct GradCheckOptions {
    double step{1e-5};
    std::size_t samples{64};
    std::uint64_t seed{0};
    /// Denominator floor for the relative error, so that parameters with
    /// vanishing gradients compare absolutely.
    double floor{1e-7};
    /// Parameter groups to skip (quadratic models only).
    std::set<ParamGroup> exclude;
};

struct GradCheckReport {
    double max_relative_error{0.0};
    double max_abs_error{0.0};
    std::size_t checked{0};
    /// Smallest |pre-activation| anywhere in the probe forward pass.
    double min_preactivation_margin{0.0};
    std::string worst;
    /// Largest |analytic| and |numeric| gradient seen.
    double max_analytic{0.0};
    double max_numeric{0.0};
};

/// Compares analytic MSE-loss gradients of randomly sampled parameters
/// against central differences.
GradCheckReport grad_check(const QAEModel& model, const Tensor& probe, const Tensor& target,
                           const GradCheckOptions& options = {});

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);
std::size_t resolve_threads(std::size_t requested);

} // namespace qae
