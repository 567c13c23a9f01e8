#include "commands.hpp"

#include "qae/checkpoint.hpp"
#include "qae/data.hpp"
#include "qae/errors.hpp"
#include "qae/image_io.hpp"
#include "qae/metrics.hpp"

#include <memory>

namespace qae::cli {

namespace {

std::vector<KeySpec> denoise_keys() {
    return {
        {"out_dir", "qae-denoise", "output directory"},
        {"checkpoint", "", "QAE1 checkpoint"},
        {"input", "", "image to denoise: .qimg in HU, or 8/16-bit grayscale .png on the [-300, 300] HU scale"},
        {"reference", "", "optional clean image (same formats) for PSNR/SSIM/RMSE"},
        {"activation", "relu", "activation the checkpoint was trained with"},
        {"alpha", "0.4", "coefficient of the quadratic activations"},
        {"window_lo", "-160", "display window low end for the PNG (HU)"},
        {"window_hi", "240", "display window high end for the PNG (HU)"},
    };
}

/// Normalized [0,1] single-channel image.
Tensor load_image(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".png") return image16_to_unit(read_png16(path));
    Tensor hu = read_qimg(path);
    if (hu.channels() != 1) throw UsageError(path.string() + " has " + std::to_string(hu.channels()) + " channels, expected 1");
    return normalize_hu(hu);
}

int run_denoise(KeyValueConfig cfg, const GlobalFlags& g) {
    const auto ckpt = require_existing(cfg.get_string("checkpoint", ""), "checkpoint");
    const auto input = require_existing(cfg.get_string("input", ""), "input");
    const std::string ref_path = cfg.get_string("reference", "");
    if (!ref_path.empty()) require_existing(ref_path, "reference");
    const Activation act = setting([&] {
        return parse_activation(cfg.get_string("activation", "relu"), cfg.get_double("alpha", 0.4));
    });
    const double lo = setting([&] { return cfg.get_double("window_lo", kDisplayWindowLowHu); });
    const double hi = setting([&] { return cfg.get_double("window_hi", kDisplayWindowHighHu); });
    if (!(lo < hi)) throw UsageError("window_lo must be below window_hi");

    const QAEModel model = load_checkpoint(ckpt, act);
    const Tensor x = load_image(input);
    const Tensor y = setting([&] { return model.forward(x); });
    const Tensor y_hu = denormalize_hu(y);

    OutputSet out;
    out.add("denoised.qimg", encode_qimg(y_hu));
    const Image16 png = render_window(y_hu, lo, hi);
    if (!ref_path.empty()) {
        const Tensor ref = load_image(ref_path);
        if (ref.shape() != x.shape()) throw UsageError("reference and input differ in shape");
        const MetricReport before = evaluate(x, ref), after = evaluate(y, ref);
        out.add("metrics.csv", std::string(kMetricCsvHeader) + "\n" + metric_csv_row("input", before) + "\n" +
                                   metric_csv_row("denoised", after) + "\n");
        say(g, "PSNR " + format_number(before.psnr) + " -> " + format_number(after.psnr) + " dB, SSIM " +
                   format_number(before.ssim) + " -> " + format_number(after.ssim));
    }
    const std::filesystem::path dir = cfg.get_string("out_dir", "qae-denoise");
    out.commit(dir, cfg, "denoise");
    write_png16(dir / "denoised.png", png);
    say(g, "wrote " + (dir / "denoised.qimg").string());
    return 0;
}

} // namespace

std::vector<Command> add_denoise(CLI::App& app, const GlobalFlags& g) {
    CLI::App* sub = app.add_subcommand("denoise", "denoise one image with a trained checkpoint");
    auto opts = std::make_shared<CommandOptions>(*sub, "denoise", denoise_keys());
    return {{sub, [opts, &g] { return run_denoise(opts->resolve(), g); }}};
}

} // namespace qae::cli
