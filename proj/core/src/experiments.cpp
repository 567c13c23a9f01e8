#include "qae/experiments.hpp"

#include "qae/errors.hpp"
#include "qae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace qae {

Corpus assemble_corpus(const std::vector<SyntheticPair>& images, const std::vector<SyntheticPair>& heldout,
                       const CorpusSpec& spec) {
    if (images.empty()) throw ArgumentError("corpus needs at least one training image");
    if (heldout.empty()) throw ArgumentError("corpus needs at least one held-out image");
    std::vector<Tensor> noisy, clean;
    for (const auto& p : images) {
        noisy.push_back(normalize_hu(p.noisy_hu));
        clean.push_back(normalize_hu(p.clean_hu));
    }
    Corpus corpus;
    auto patches = extract_patches(noisy, clean, spec.patch_size, spec.train_patches + spec.val_patches,
                                   derive_seed(spec.seed, "patches"));
    // Interleaved per-image extraction; shuffle once so the split mixes images.
    Rng rng = make_rng(spec.seed, "split");
    std::shuffle(patches.begin(), patches.end(), rng);
    corpus.train.assign(std::make_move_iterator(patches.begin()),
                        std::make_move_iterator(patches.begin() + static_cast<std::ptrdiff_t>(spec.train_patches)));
    corpus.val.assign(std::make_move_iterator(patches.begin() + static_cast<std::ptrdiff_t>(spec.train_patches)),
                      std::make_move_iterator(patches.end()));
    for (const auto& p : heldout) {
        corpus.heldout_noisy.push_back(normalize_hu(p.noisy_hu));
        corpus.heldout_clean.push_back(normalize_hu(p.clean_hu));
    }
    return corpus;
}

SyntheticImages synth_images(const CorpusSpec& spec) {
    if (spec.images == 0) throw ArgumentError("corpus needs at least one training image");
    if (spec.heldout_images == 0) throw ArgumentError("corpus needs at least one held-out image");
    return {synth_corpus(spec.images, spec.image_size, spec.noise, derive_seed(spec.seed, "train-images")),
            synth_corpus(spec.heldout_images, spec.image_size, spec.noise, derive_seed(spec.seed, "heldout"))};
}

Corpus build_corpus(const CorpusSpec& spec) {
    const SyntheticImages images = synth_images(spec);
    return assemble_corpus(images.train, images.heldout, spec);
}

MetricReport noisy_baseline(const Corpus& corpus) {
    std::vector<MetricReport> reports;
    for (std::size_t i = 0; i < corpus.heldout_noisy.size(); ++i) {
        reports.push_back(evaluate(corpus.heldout_noisy[i], corpus.heldout_clean[i]));
    }
    return mean_report(reports);
}

MetricReport heldout_metrics(const QAEModel& model, const Corpus& corpus) {
    std::vector<MetricReport> reports;
    for (std::size_t i = 0; i < corpus.heldout_noisy.size(); ++i) {
        reports.push_back(evaluate(model.forward(corpus.heldout_noisy[i]), corpus.heldout_clean[i]));
    }
    return mean_report(reports);
}

std::string kind_label(ModelKind kind) {
    switch (kind) {
    case ModelKind::QAE: return "qae";
    case ModelKind::AE: return "ae";
    case ModelKind::AEQuadraticAct: return "ae-qa";
    case ModelKind::AERectifiedQuadraticAct: return "ae-rqa";
    }
    return "qae";
}

ModelKind parse_model_kind(std::string_view label) {
    for (ModelKind k : {ModelKind::QAE, ModelKind::AE, ModelKind::AEQuadraticAct, ModelKind::AERectifiedQuadraticAct}) {
        if (kind_label(k) == label) return k;
    }
    throw ArgumentError("unknown model kind '" + std::string(label) + "' (expected qae, ae, ae-qa, ae-rqa)");
}

QAEConfig model_config(ModelKind kind, std::size_t width, std::size_t kernel, double alpha) {
    switch (kind) {
    case ModelKind::QAE: return {width, kernel, NeuronKind::Quadratic, Activation::relu()};
    case ModelKind::AE: return {width, kernel, NeuronKind::Conventional, Activation::relu()};
    case ModelKind::AEQuadraticAct: return {width, kernel, NeuronKind::Conventional, Activation::quadratic(alpha)};
    case ModelKind::AERectifiedQuadraticAct:
        return {width, kernel, NeuronKind::Conventional, Activation::rectified_quadratic(alpha)};
    }
    return {};
}

RunRow run_one(const RunRequest& request, const Corpus& corpus) {
    const QAEConfig cfg = model_config(request.kind, request.width, request.kernel, request.alpha);
    QAEModel model = build_qae(cfg, request.seed, ScratchInit{request.w_b_init});

    TrainConfig tc = request.train;
    tc.seed = request.seed;
    tc.on_divergence = DivergencePolicy::Record;
    TrainResult tr = train(std::move(model), corpus.train, corpus.val, tc);

    RunRow row;
    row.label = request.label.empty() ? kind_label(request.kind) : request.label;
    row.kind = request.kind;
    row.width = request.width;
    row.seed = request.seed;
    row.params = tr.best.count_params();
    row.history = tr.history;
    row.diverged = tr.diverged;
    if (tr.diverged) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.final_val_loss = nan;
        row.metrics = MetricReport{nan, nan, nan};
    } else {
        row.final_val_loss = tr.final_val_loss();
        row.metrics = heldout_metrics(tr.best, corpus);
    }
    return row;
}

namespace {

void sort_rows(std::vector<RunRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
        return std::tie(a.label, a.width, a.seed) < std::tie(b.label, b.width, b.seed);
    });
}

const LrSchedule& schedule_for(const SweepSpec& spec, ModelKind kind) {
    for (const auto& [k, s] : spec.schedules)
        if (k == kind) return s;
    return spec.train.schedule;
}

RunRequest request_for(const SweepSpec& spec, ModelKind kind, std::size_t width, std::size_t repeat) {
    RunRequest r;
    r.kind = kind;
    r.width = width;
    r.seed = spec.base_seed + repeat;
    r.w_b_init = spec.w_b_init;
    r.alpha = spec.alpha;
    r.kernel = spec.kernel;
    r.train = spec.train;
    r.train.schedule = schedule_for(spec, kind);
    return r;
}

} // namespace

void SweepSpec::validate() const {
    if (widths.empty()) throw ArgumentError("sweep needs at least one width");
    if (kinds.empty()) throw ArgumentError("sweep needs at least one model kind");
    if (repeats == 0) throw ArgumentError("repeats must be >= 1");
    train.validate();
    for (const auto& [k, s] : schedules) s.validate(train.epochs);
}

std::string sweep_csv(const SweepResult& result) {
    std::vector<RunRow> rows = result.rows;
    sort_rows(rows);
    std::string out = "kind,width,seed,params,log10_params,final_val_loss,psnr,ssim,rmse\n";
    for (const RunRow& r : rows) {
        out += r.label + "," + std::to_string(r.width) + "," + std::to_string(r.seed) + "," +
               std::to_string(r.params) + "," + format_number(std::log10(static_cast<double>(r.params))) + "," +
               (r.diverged ? std::string("diverged") : format_number(r.final_val_loss)) + "," +
               format_number(r.metrics.psnr) + "," + format_number(r.metrics.ssim) + "," +
               format_number(r.metrics.rmse) + "\n";
    }
    return out;
}

std::string curves_csv(const SweepResult& result) {
    std::vector<RunRow> rows = result.rows;
    sort_rows(rows);
    std::string out = "kind,width,seed,epoch,val_loss\n";
    for (const RunRow& r : rows) {
        for (const EpochRecord& e : r.history) {
            out += r.label + "," + std::to_string(r.width) + "," + std::to_string(r.seed) + "," +
                   std::to_string(e.epoch) + "," + format_number(e.val_loss) + "\n";
        }
    }
    return out;
}

SweepResult run_efficiency_sweep(const SweepSpec& spec) {
    spec.validate();
    const Corpus corpus = build_corpus(spec.corpus);
    SweepResult result;
    result.noisy = noisy_baseline(corpus);
    for (ModelKind kind : spec.kinds)
        for (std::size_t width : spec.widths)
            for (std::size_t r = 0; r < spec.repeats; ++r)
                result.rows.push_back(run_one(request_for(spec, kind, width, r), corpus));
    sort_rows(result.rows);
    return result;
}

SwapResult run_swap_study(const SweepSpec& base, double ae_rate) {
    SweepSpec spec = base;
    spec.kinds = {ModelKind::QAE, ModelKind::AE};
    spec.schedules.erase(std::remove_if(spec.schedules.begin(), spec.schedules.end(),
                                        [](const auto& p) { return p.first == ModelKind::AE; }),
                         spec.schedules.end());
    spec.schedules.emplace_back(ModelKind::AE, LrSchedule::constant(ae_rate, spec.train.epochs));

    SwapResult out;
    out.runs = run_efficiency_sweep(spec);

    auto mean_rmse = [&](ModelKind kind, std::size_t width, std::size_t& params) {
        double s = 0.0;
        std::size_t n = 0;
        for (const RunRow& r : out.runs.rows) {
            if (r.kind != kind || r.width != width) continue;
            params = r.params;
            s += r.metrics.rmse;
            ++n;
        }
        return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    };
    auto add_pair = [&](std::size_t qw, std::size_t aw) {
        SwapPair p{qw, aw, 0, 0, 0.0, 0.0, 0.0};
        p.qae_rmse = mean_rmse(ModelKind::QAE, qw, p.qae_params);
        p.ae_rmse = mean_rmse(ModelKind::AE, aw, p.ae_params);
        p.relative_gap = (p.ae_rmse - p.qae_rmse) / p.ae_rmse;
        out.pairs.push_back(p);
    };
    const auto& w = spec.widths;
    for (std::size_t width : w) add_pair(width, width);
    if (std::find(w.begin(), w.end(), 8) != w.end() && std::find(w.begin(), w.end(), 15) != w.end()) add_pair(8, 15);
    return out;
}

std::string swap_pairs_csv(const SwapResult& result) {
    std::string out = "qae_width,ae_width,qae_params,ae_params,qae_rmse,ae_rmse,relative_gap\n";
    for (const SwapPair& p : result.pairs) {
        out += std::to_string(p.qae_width) + "," + std::to_string(p.ae_width) + "," + std::to_string(p.qae_params) +
               "," + std::to_string(p.ae_params) + "," + format_number(p.qae_rmse) + "," + format_number(p.ae_rmse) +
               "," + format_number(p.relative_gap) + "\n";
    }
    return out;
}

std::string status_name(ConvergenceStatus s) {
    switch (s) {
    case ConvergenceStatus::Converged: return "converged";
    case ConvergenceStatus::NotConverged: return "not-converged";
    case ConvergenceStatus::Diverged: return "diverged";
    }
    return "diverged";
}

ConvergenceStatus classify(const RunRow& row) {
    if (row.diverged || row.history.empty()) return ConvergenceStatus::Diverged;
    const double initial = row.history.front().val_loss;
    const double final = row.history.back().val_loss;
    return std::isfinite(final) && final < initial ? ConvergenceStatus::Converged : ConvergenceStatus::NotConverged;
}

SweepResult run_activation_study(const ActivationStudySpec& spec) {
    SweepSpec s = spec.base;
    s.widths = {spec.width};
    s.alpha = spec.alpha;
    s.kinds = {ModelKind::AEQuadraticAct, ModelKind::AERectifiedQuadraticAct, ModelKind::QAE};
    s.schedules = {{ModelKind::AEQuadraticAct, LrSchedule::constant(spec.quadratic_rate, s.train.epochs)},
                   {ModelKind::AERectifiedQuadraticAct, LrSchedule::constant(spec.rectified_rate, s.train.epochs)}};
    return run_efficiency_sweep(s);
}

std::string status_csv(const SweepResult& result) {
    std::vector<RunRow> rows = result.rows;
    sort_rows(rows);
    std::string out = "kind,width,seed,status\n";
    for (const RunRow& r : rows) {
        out += r.label + "," + std::to_string(r.width) + "," + std::to_string(r.seed) + "," + status_name(classify(r)) + "\n";
    }
    return out;
}

InitRobustnessResult run_init_robustness(const InitRobustnessSpec& spec) {
    if (spec.w_b_consts.empty()) throw ArgumentError("init-robustness needs at least one w_b condition");
    SweepSpec base = spec.base;
    base.widths = {spec.width};
    base.kinds = {ModelKind::QAE};
    base.repeats = spec.repeats;
    base.validate();

    const Corpus corpus = build_corpus(base.corpus);
    InitRobustnessResult out;
    out.runs.noisy = noisy_baseline(corpus);
    for (double wb : spec.w_b_consts) {
        InitConditionSummary summary{wb, std::numeric_limits<double>::infinity(),
                                     -std::numeric_limits<double>::infinity(), 0.0, 0};
        for (std::size_t r = 0; r < spec.repeats; ++r) {
            RunRequest req = request_for(base, ModelKind::QAE, spec.width, r);
            req.w_b_init = wb;
            req.label = "qae-wb=" + format_number(wb);
            RunRow row = run_one(req, corpus);
            if (row.diverged) {
                ++summary.diverged;
            } else {
                summary.min_final = std::min(summary.min_final, row.final_val_loss);
                summary.max_final = std::max(summary.max_final, row.final_val_loss);
            }
            out.runs.rows.push_back(std::move(row));
        }
        summary.spread = summary.max_final - summary.min_final;
        out.summary.push_back(summary);
    }
    sort_rows(out.runs.rows);
    return out;
}

std::string init_summary_csv(const InitRobustnessResult& result) {
    std::string out = "w_b,min_final_val_loss,max_final_val_loss,spread,diverged\n";
    for (const auto& s : result.summary) {
        out += format_number(s.w_b) + "," + format_number(s.min_final) + "," + format_number(s.max_final) + "," +
               format_number(s.spread) + "," + std::to_string(s.diverged) + "\n";
    }
    return out;
}

} // namespace qae
