#pragma once

// Desk-scale studies on the synthetic corpus: model efficiency across widths,
// quadratic vs conventional neurons, quadratic activations, and sensitivity
// to initialization. Every study returns one row per requested
// (kind, width, seed) run; diverged runs are kept and flagged.

#include "qae/data.hpp"
#include "qae/metrics.hpp"
#include "qae/model.hpp"
#include "qae/training.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qae {

struct CorpusSpec {
    std::size_t images{6};
    std::size_t image_size{128};
    NoiseSpec noise{};
    std::size_t patch_size{64};
    std::size_t train_patches{2000};
    std::size_t val_patches{200};
    std::size_t heldout_images{2};
    std::uint64_t seed{7};
};

/// Normalized ([0,1]) patches and held-out full images.
struct Corpus {
    std::vector<PatchPair> train;
    std::vector<PatchPair> val;
    std::vector<Tensor> heldout_noisy;
    std::vector<Tensor> heldout_clean;
};

struct SyntheticImages {
    std::vector<SyntheticPair> train;
    std::vector<SyntheticPair> heldout;
};

/// The HU phantom/noisy pairs build_corpus draws from.
SyntheticImages synth_images(const CorpusSpec& spec);

/// Normalizes the images, draws train_patches + val_patches patches across
/// `images`, shuffles and splits them. Only the patch fields and seed of
/// `spec` are used.
Corpus assemble_corpus(const std::vector<SyntheticPair>& images, const std::vector<SyntheticPair>& heldout,
                       const CorpusSpec& spec);

/// Training/validation patches come from `images` phantoms (the first
/// train_patches as training, the rest validation); held-out images are
/// separate phantoms.
Corpus build_corpus(const CorpusSpec& spec);

MetricReport noisy_baseline(const Corpus& corpus);
MetricReport heldout_metrics(const QAEModel& model, const Corpus& corpus);

enum class ModelKind {
    QAE,                    // quadratic neurons, ReLU
    AE,                     // conventional neurons, ReLU
    AEQuadraticAct,         // conventional neurons, alpha x^2
    AERectifiedQuadraticAct // conventional neurons, alpha x^2 for x > 0
};

std::string kind_label(ModelKind kind);
ModelKind parse_model_kind(std::string_view label);
QAEConfig model_config(ModelKind kind, std::size_t width, std::size_t kernel = 3, double alpha = 0.4);

struct RunRequest {
    ModelKind kind{ModelKind::QAE};
    std::size_t width{15};
    std::uint64_t seed{1};
    /// Label override for curves (e.g. an initialization condition).
    std::string label;
    double w_b_init{0.0};
    double alpha{0.4};
    std::size_t kernel{3};
    TrainConfig train{};
};

struct RunRow {
    std::string label;
    ModelKind kind{ModelKind::QAE};
    std::size_t width{0};
    std::uint64_t seed{0};
    std::size_t params{0};
    double final_val_loss{0.0};
    MetricReport metrics{};
    bool diverged{false};
    std::vector<EpochRecord> history;
};

RunRow run_one(const RunRequest& request, const Corpus& corpus);

struct SweepResult {
    std::vector<RunRow> rows;
    MetricReport noisy{};
};

/// kind,width,seed,params,log10_params,final_val_loss,psnr,ssim,rmse
/// (sorted by label, width, seed; diverged runs print "diverged" and nan metrics).
std::string sweep_csv(const SweepResult& result);
/// kind,width,seed,epoch,val_loss
std::string curves_csv(const SweepResult& result);

struct SweepSpec {
    std::vector<std::size_t> widths{8, 15, 32, 48};
    std::vector<ModelKind> kinds{ModelKind::QAE};
    std::size_t repeats{1};
    std::uint64_t base_seed{1};
    std::size_t kernel{3};
    double alpha{0.4};
    double w_b_init{0.0};
    CorpusSpec corpus{};
    TrainConfig train{};
    /// Per-kind schedule overrides; kinds without one use `train.schedule`.
    std::vector<std::pair<ModelKind, LrSchedule>> schedules;

    void validate() const;
};

SweepResult run_efficiency_sweep(const SweepSpec& spec);

struct SwapPair {
    std::size_t qae_width;
    std::size_t ae_width;
    std::size_t qae_params;
    std::size_t ae_params;
    double qae_rmse;
    double ae_rmse;
    /// (ae_rmse - qae_rmse) / ae_rmse: positive when the quadratic model is better.
    double relative_gap;
};

struct SwapResult {
    SweepResult runs;
    std::vector<SwapPair> pairs;
};

/// Q-AE(n) vs AE(n) for each width (AE trained at `ae_rate`, constant), plus
/// Q-AE(8) vs AE(15) when both widths are present.
SwapResult run_swap_study(const SweepSpec& spec, double ae_rate = 5e-4);
std::string swap_pairs_csv(const SwapResult& result);

enum class ConvergenceStatus { Converged, NotConverged, Diverged };
std::string status_name(ConvergenceStatus s);
/// Diverged if flagged; Converged when the final validation loss is below the initial one.
ConvergenceStatus classify(const RunRow& row);

struct ActivationStudySpec {
    std::size_t width{15};
    double alpha{0.4};
    double quadratic_rate{5e-5};
    double rectified_rate{5e-4};
    SweepSpec base{};
};

/// AE with quadratic activation, AE with rectified quadratic activation, and Q-AE.
SweepResult run_activation_study(const ActivationStudySpec& spec);
/// kind,width,seed,status
std::string status_csv(const SweepResult& result);

struct InitRobustnessSpec {
    std::vector<double> w_b_consts{0.0, 0.001, 0.003};
    std::size_t repeats{5};
    std::size_t width{15};
    SweepSpec base{};
};

struct InitConditionSummary {
    double w_b;
    double min_final;
    double max_final;
    double spread;
    std::size_t diverged;
};

struct InitRobustnessResult {
    SweepResult runs;
    std::vector<InitConditionSummary> summary;
};

InitRobustnessResult run_init_robustness(const InitRobustnessSpec& spec);
/// w_b,min_final_val_loss,max_final_val_loss,spread,diverged
std::string init_summary_csv(const InitRobustnessResult& result);

} // namespace qae
