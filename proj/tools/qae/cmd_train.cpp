#include "commands.hpp"
#include "settings.hpp"

#include "qae/checkpoint.hpp"
#include "qae/errors.hpp"
#include "qae/experiments.hpp"
#include "qae/image_io.hpp"

#include <memory>

namespace qae::cli {

namespace {

std::vector<KeySpec> train_keys() {
    std::vector<KeySpec> keys{
        {"out_dir", "qae-train", "output directory"},
        {"corpus", "", "corpus directory from gen-corpus (empty: synthesize in memory)"},
        {"seed", "1", "seed for initialization and shuffling"},
        {"channels", "15", "channels per hidden layer"},
        {"kernel", "3", "odd kernel size"},
        {"kind", "quadratic", "neuron kind: quadratic or conventional"},
        {"activation", "relu", "relu, identity, quadratic or rectified-quadratic"},
        {"alpha", "0.4", "coefficient of the quadratic activations"},
        {"init", "scratch", "scratch or transfer"},
        {"init_stddev", "0.01", "stddev of the truncated-normal w_r draw (scratch)"},
        {"w_b_init", "0", "constant initial w_b"},
        {"transfer_from", "", "conventional checkpoint to initialize from (init = transfer)"},
        {"literal_unit_w_g", "false", "transfer with w_g = 1 instead of the function-preserving w_g = 0"},
        {"freeze", "", "quadratic parameter groups held fixed, e.g. w_g,w_b,b_g,c"},
    };
    for (auto k : corpus_image_keys()) keys.push_back(k);
    for (auto k : corpus_patch_keys()) keys.push_back(k);
    for (auto k : training_keys()) keys.push_back(k);
    return keys;
}

int run_train(KeyValueConfig cfg, const GlobalFlags& g) {
    const CorpusSpec cspec = corpus_spec(cfg);
    const TrainConfig tcfg = train_config(cfg);
    const QAEConfig mcfg = setting([&] {
        QAEConfig m;
        m.channels = cfg.get_size("channels", 15);
        m.kernel = cfg.get_size("kernel", 3);
        m.kind = parse_neuron_kind(cfg.get_string("kind", "quadratic"));
        m.activation = parse_activation(cfg.get_string("activation", "relu"), cfg.get_double("alpha", 0.4));
        m.validate();
        return m;
    });
    const std::string init = cfg.get_string("init", "scratch");
    if (init != "scratch" && init != "transfer") throw UsageError("init must be scratch or transfer, got '" + init + "'");
    const double w_b = setting([&] { return cfg.get_double("w_b_init", 0.0); });
    const double stddev = setting([&] { return cfg.get_double("init_stddev", 0.01); });
    const bool literal = setting([&] { return cfg.get_bool("literal_unit_w_g", false); });

    // Inputs are checked before any work so that a bad path leaves nothing behind.
    const std::string corpus_dir = cfg.get_string("corpus", "");
    std::optional<SyntheticImages> images;
    if (!corpus_dir.empty()) images = read_corpus_dir(require_existing(corpus_dir, "corpus"));
    std::optional<QAEModel> source;
    if (init == "transfer") {
        source = load_checkpoint(require_existing(cfg.get_string("transfer_from", ""), "transfer_from"));
        if (mcfg.kind != NeuronKind::Quadratic || source->kind() != NeuronKind::Conventional) {
            throw UsageError("transfer initializes a quadratic model from a conventional checkpoint");
        }
    }

    const Corpus corpus = setting([&] {
        return images ? assemble_corpus(images->train, images->heldout, cspec) : build_corpus(cspec);
    });

    QAEModel model = build_qae(mcfg, tcfg.seed, ScratchInit{w_b, stddev});
    if (source) init_transfer(model, *source, {w_b, literal});

    say(g, "training " + neuron_kind_name(mcfg.kind) + " width " + std::to_string(mcfg.channels) + " (" +
               std::to_string(model.count_params()) + " parameters) on " + std::to_string(corpus.train.size()) +
               " patches");
    const TrainResult result = train(std::move(model), corpus.train, corpus.val, tcfg, [&](const EpochRecord& r) {
        say(g, "epoch " + std::to_string(r.epoch) + "  train " + format_number(r.train_loss) + "  val " +
                   format_number(r.val_loss));
    });

    const MetricReport noisy = noisy_baseline(corpus);
    const MetricReport denoised = heldout_metrics(result.best, corpus);
    const std::string metrics = std::string(kMetricCsvHeader) + "\n" + metric_csv_row("noisy", noisy) + "\n" +
                                metric_csv_row("model", denoised) + "\n";
    say(g, "best epoch " + std::to_string(result.best_epoch) + "; held-out PSNR " + format_number(noisy.psnr) +
               " -> " + format_number(denoised.psnr) + " dB");

    OutputSet out;
    out.add("model.qae", serialize(result.best));
    out.add("history.csv", history_csv(result.history));
    out.add("metrics.csv", metrics);
    out.commit(cfg.get_string("out_dir", "qae-train"), cfg, "train");
    return 0;
}

std::vector<KeySpec> corpus_keys() {
    std::vector<KeySpec> keys{
        {"out_dir", "qae-corpus", "output directory"},
        {"seed", "7", "corpus seed (use the same value as corpus_seed when training)"},
        {"window_lo", "-160", "preview display window low end (HU)"},
        {"window_hi", "240", "preview display window high end (HU)"},
    };
    for (auto k : corpus_image_keys()) keys.push_back(k);
    return keys;
}

int run_gen_corpus(KeyValueConfig cfg, const GlobalFlags& g) {
    CorpusSpec spec = corpus_spec(cfg);
    spec.seed = setting([&] { return cfg.get_u64("seed", 7); });
    const double lo = setting([&] { return cfg.get_double("window_lo", -160.0); });
    const double hi = setting([&] { return cfg.get_double("window_hi", 240.0); });
    const SyntheticImages images = setting([&] { return synth_images(spec); });

    OutputSet out;
    auto add_split = [&](const std::string& split, const std::vector<SyntheticPair>& pairs) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            out.add(corpus_file(split, "clean", i), encode_qimg(pairs[i].clean_hu));
            out.add(corpus_file(split, "noisy", i), encode_qimg(pairs[i].noisy_hu));
        }
    };
    add_split("train", images.train);
    add_split("heldout", images.heldout);

    std::vector<Image16> previews;
    for (const auto& pair : images.heldout) previews.push_back(setting([&] { return render_window(pair.noisy_hu, lo, hi); }));

    const std::filesystem::path dir = cfg.get_string("out_dir", "qae-corpus");
    out.commit(dir, cfg, "gen-corpus");
    // Previews are for looking at, not for reading back.
    for (std::size_t i = 0; i < previews.size(); ++i) {
        const std::string name = corpus_file("heldout", "noisy", i);
        write_png16(dir / (name.substr(0, name.size() - 5) + ".png"), previews[i]);
    }
    say(g, "wrote " + std::to_string(images.train.size()) + " training and " + std::to_string(images.heldout.size()) +
               " held-out image pairs to " + dir.string());
    return 0;
}

} // namespace

std::vector<Command> add_train(CLI::App& app, const GlobalFlags& g) {
    CLI::App* sub = app.add_subcommand("train", "train a Q-AE (or conventional AE) denoiser");
    auto opts = std::make_shared<CommandOptions>(*sub, "train", train_keys());
    return {{sub, [opts, &g] { return run_train(opts->resolve(), g); }}};
}

std::vector<Command> add_gen_corpus(CLI::App& app, const GlobalFlags& g) {
    CLI::App* sub = app.add_subcommand("gen-corpus", "write a synthetic phantom/noisy corpus as QIMG files");
    auto opts = std::make_shared<CommandOptions>(*sub, "gen-corpus", corpus_keys());
    return {{sub, [opts, &g] { return run_gen_corpus(opts->resolve(), g); }}};
}

} // namespace qae::cli
