#include "commands.hpp"
#include "settings.hpp"

#include "qae/errors.hpp"
#include "qae/experiments.hpp"

#include <memory>

namespace qae::cli {

namespace {

enum class Study { Efficiency, Swap, Activation, InitRobustness };

std::vector<KeySpec> study_keys(Study s) {
    std::vector<KeySpec> keys{
        {"out_dir", "qae-study", "output directory"},
        {"seed", "1", "seed of the first repeat; repeat r uses seed + r"},
        {"kernel", "3", "odd kernel size"},
    };
    switch (s) {
    case Study::Efficiency:
        keys.push_back({"widths", "8,15,32,48", "channel widths"});
        keys.push_back({"kinds", "qae", "model kinds: qae, ae, ae-qa, ae-rqa"});
        keys.push_back({"repeats", "1", "runs per (kind, width)"});
        keys.push_back({"w_b_init", "0", "constant initial w_b of quadratic models"});
        keys.push_back({"alpha", "0.4", "coefficient of the quadratic activations"});
        break;
    case Study::Swap:
        keys.push_back({"widths", "8,15,32,48", "channel widths"});
        keys.push_back({"repeats", "1", "runs per (kind, width)"});
        keys.push_back({"w_b_init", "0", "constant initial w_b of quadratic models"});
        keys.push_back({"ae_rate", "5e-4", "constant learning rate of the conventional AE"});
        break;
    case Study::Activation:
        keys.push_back({"width", "15", "channel width"});
        keys.push_back({"repeats", "1", "runs per model"});
        keys.push_back({"alpha", "0.4", "coefficient of the quadratic activations"});
        keys.push_back({"qa_rate", "5e-5", "learning rate of the AE with quadratic activation"});
        keys.push_back({"rqa_rate", "5e-4", "learning rate of the AE with rectified quadratic activation"});
        break;
    case Study::InitRobustness:
        keys.push_back({"width", "15", "channel width"});
        keys.push_back({"repeats", "5", "random w_r draws per condition"});
        keys.push_back({"w_b_consts", "0,0.001,0.003", "initial w_b conditions"});
        break;
    }
    for (auto k : corpus_image_keys()) keys.push_back(k);
    for (auto k : corpus_patch_keys()) keys.push_back(k);
    for (auto k : training_keys()) keys.push_back(k);
    return keys;
}

SweepSpec sweep_spec(KeyValueConfig& cfg) {
    SweepSpec s;
    s.corpus = corpus_spec(cfg);
    s.train = train_config(cfg);
    setting([&] {
        s.base_seed = cfg.get_u64("seed", 1);
        s.kernel = cfg.get_size("kernel", 3);
        s.widths = cfg.get_size_list("widths", {15});
        s.repeats = cfg.get_size("repeats", 1);
        s.w_b_init = cfg.get_double("w_b_init", 0.0);
        s.alpha = cfg.get_double("alpha", 0.4);
        s.kinds.clear();
        for (const std::string& k : split_list(cfg.get_string("kinds", "qae"))) s.kinds.push_back(parse_model_kind(k));
        QAEConfig{1, s.kernel, NeuronKind::Quadratic, {}}.validate();
        s.validate();
        return 0;
    });
    return s;
}

void log_rows(const GlobalFlags& g, const SweepResult& r) {
    say(g, "noisy input: PSNR " + format_number(r.noisy.psnr) + " dB");
    for (const RunRow& row : r.rows) {
        say(g, row.label + " width " + std::to_string(row.width) + " seed " + std::to_string(row.seed) + ": " +
                   (row.diverged ? std::string("diverged")
                                 : "val " + format_number(row.final_val_loss) + ", PSNR " + format_number(row.metrics.psnr)));
    }
}

std::string baseline_csv(const SweepResult& r) {
    return std::string(kMetricCsvHeader) + "\n" + metric_csv_row("noisy", r.noisy) + "\n";
}

int run_study(Study study, KeyValueConfig cfg, const GlobalFlags& g, const std::string& command) {
    SweepSpec spec = sweep_spec(cfg);
    OutputSet out;
    switch (study) {
    case Study::Efficiency: {
        const SweepResult r = run_efficiency_sweep(spec);
        log_rows(g, r);
        out.add("sweep.csv", sweep_csv(r));
        out.add("curves.csv", curves_csv(r));
        out.add("baseline.csv", baseline_csv(r));
        break;
    }
    case Study::Swap: {
        const double rate = setting([&] { return cfg.get_double("ae_rate", 5e-4); });
        if (!(rate > 0)) throw UsageError("ae_rate must be positive");
        const SwapResult r = run_swap_study(spec, rate);
        log_rows(g, r.runs);
        for (const SwapPair& p : r.pairs) {
            say(g, "Q-AE(" + std::to_string(p.qae_width) + ") vs AE(" + std::to_string(p.ae_width) + "): RMSE " +
                       format_number(p.qae_rmse) + " vs " + format_number(p.ae_rmse) + ", relative gap " +
                       format_number(p.relative_gap));
        }
        out.add("sweep.csv", sweep_csv(r.runs));
        out.add("curves.csv", curves_csv(r.runs));
        out.add("pairs.csv", swap_pairs_csv(r));
        out.add("baseline.csv", baseline_csv(r.runs));
        break;
    }
    case Study::Activation: {
        ActivationStudySpec a;
        setting([&] {
            a.width = cfg.get_size("width", 15);
            a.alpha = cfg.get_double("alpha", 0.4);
            a.quadratic_rate = cfg.get_double("qa_rate", 5e-5);
            a.rectified_rate = cfg.get_double("rqa_rate", 5e-4);
            if (!(a.quadratic_rate > 0 && a.rectified_rate > 0)) throw ArgumentError("learning rates must be positive");
            return 0;
        });
        a.base = spec;
        const SweepResult r = run_activation_study(a);
        log_rows(g, r);
        out.add("sweep.csv", sweep_csv(r));
        out.add("curves.csv", curves_csv(r));
        out.add("status.csv", status_csv(r));
        out.add("baseline.csv", baseline_csv(r));
        break;
    }
    case Study::InitRobustness: {
        InitRobustnessSpec s;
        setting([&] {
            s.width = cfg.get_size("width", 15);
            s.repeats = cfg.get_size("repeats", 5);
            s.w_b_consts = cfg.get_double_list("w_b_consts", s.w_b_consts);
            return 0;
        });
        s.base = spec;
        const InitRobustnessResult r = setting([&] { return run_init_robustness(s); });
        log_rows(g, r.runs);
        out.add("sweep.csv", sweep_csv(r.runs));
        out.add("curves.csv", curves_csv(r.runs));
        out.add("summary.csv", init_summary_csv(r));
        out.add("baseline.csv", baseline_csv(r.runs));
        break;
    }
    }
    out.commit(cfg.get_string("out_dir", "qae-study"), cfg, command);
    return 0;
}

Command add_one(CLI::App& parent, const GlobalFlags& g, Study s, const std::string& name, const std::string& help) {
    CLI::App* sub = parent.add_subcommand(name, help);
    const std::string command = "study " + name;
    auto opts = std::make_shared<CommandOptions>(*sub, command, study_keys(s));
    return {sub, [opts, &g, s, command] { return run_study(s, opts->resolve(), g, command); }};
}

} // namespace

std::vector<Command> add_study(CLI::App& app, const GlobalFlags& g) {
    CLI::App* study = app.add_subcommand("study", "desk-scale experiments on the synthetic corpus");
    study->require_subcommand(1);
    return {
        add_one(*study, g, Study::Efficiency, "efficiency", "parameter count vs held-out quality across widths"),
        add_one(*study, g, Study::Swap, "swap", "Q-AE vs AE with the neurons swapped"),
        add_one(*study, g, Study::Activation, "activation", "AE with quadratic activations vs Q-AE"),
        add_one(*study, g, Study::InitRobustness, "init-robustness", "final-loss spread over w_r draws per w_b"),
    };
}

} // namespace qae::cli
