#include "settings.hpp"

#include "qae/errors.hpp"
#include "qae/image_io.hpp"

#include <cstdio>

namespace qae::cli {

std::vector<KeySpec> corpus_image_keys() {
    return {
        {"images", "6", "synthetic phantoms for training/validation patches"},
        {"image_size", "128", "phantom side length in pixels (>= 64)"},
        {"heldout_images", "2", "separate phantoms for held-out metrics"},
        {"noise_sigma", "30", "additive noise standard deviation (HU)"},
        {"dose_factor", "1", "relative dose; quantum noise scales with 1/sqrt(dose)"},
        {"quantum_hu", "20", "signal-dependent noise at 0 HU and dose 1 (HU)"},
    };
}

std::vector<KeySpec> corpus_patch_keys() {
    return {
        {"patch_size", "64", "training patch side length"},
        {"train_patches", "2000", "training patches"},
        {"val_patches", "200", "validation patches"},
        {"corpus_seed", "7", "seed for phantoms, noise and patch sampling"},
    };
}

std::vector<KeySpec> training_keys(const std::string& default_epochs) {
    return {
        {"epochs", default_epochs, "training epochs"},
        {"batch_size", "50", "minibatch size"},
        {"lr_schedule", "", "FIRST-LAST:RATE,... (empty: 4e-4 for epochs 1-10, 2e-4 after)"},
        {"shuffle", "true", "reshuffle training patches every epoch"},
        {"threads", "0", "worker threads, 0 = all cores (results do not depend on it)"},
    };
}

NoiseSpec noise_spec(const KeyValueConfig& cfg) {
    return setting([&] {
        return NoiseSpec{cfg.get_double("noise_sigma", 30.0), cfg.get_double("dose_factor", 1.0),
                         cfg.get_double("quantum_hu", 20.0)};
    });
}

CorpusSpec corpus_spec(const KeyValueConfig& cfg) {
    return setting([&] {
        CorpusSpec c;
        c.images = cfg.get_size("images", c.images);
        c.image_size = cfg.get_size("image_size", c.image_size);
        c.heldout_images = cfg.get_size("heldout_images", c.heldout_images);
        c.noise = noise_spec(cfg);
        c.patch_size = cfg.get_size("patch_size", c.patch_size);
        c.train_patches = cfg.get_size("train_patches", c.train_patches);
        c.val_patches = cfg.get_size("val_patches", c.val_patches);
        c.seed = cfg.get_u64("corpus_seed", c.seed);
        if (c.train_patches == 0 || c.val_patches == 0) throw ArgumentError("train_patches and val_patches must be >= 1");
        return c;
    });
}

TrainConfig train_config(KeyValueConfig& cfg) {
    return setting([&] {
        TrainConfig t;
        t.epochs = cfg.get_size("epochs", t.epochs);
        t.batch_size = cfg.get_size("batch_size", t.batch_size);
        const std::string sched = cfg.get_string("lr_schedule", "");
        t.schedule = sched.empty() ? LrSchedule::standard(t.epochs) : LrSchedule::parse(sched);
        cfg.set("lr_schedule", t.schedule.to_string());
        t.shuffle = cfg.get_bool("shuffle", true);
        t.threads = cfg.get_size("threads", 0);
        t.seed = cfg.get_u64("seed", 1);
        if (cfg.has("freeze")) t.frozen = parse_groups(cfg.get_string("freeze", ""));
        t.validate();
        return t;
    });
}

std::set<ParamGroup> parse_groups(const std::string& list) {
    std::set<ParamGroup> out;
    for (const std::string& name : split_list(list)) {
        bool found = false;
        for (ParamGroup g : QuadraticConvParams::kGroups) {
            if (group_name(g) == name) {
                out.insert(g);
                found = true;
            }
        }
        if (!found) throw ArgumentError("unknown parameter group '" + name + "' (expected w_r, w_g, w_b, b_r, b_g, c)");
    }
    return out;
}

std::string corpus_file(const std::string& split, const std::string& which, std::size_t index) {
    char name[32];
    std::snprintf(name, sizeof name, "_%03zu.qimg", index);
    return split + "/" + which + name;
}

namespace {

std::vector<SyntheticPair> read_split(const std::filesystem::path& dir, const std::string& split) {
    std::vector<SyntheticPair> out;
    for (std::size_t i = 0;; ++i) {
        const auto clean = dir / corpus_file(split, "clean", i);
        const auto noisy = dir / corpus_file(split, "noisy", i);
        if (!std::filesystem::exists(clean) || !std::filesystem::exists(noisy)) break;
        out.push_back({read_qimg(clean), read_qimg(noisy)});
    }
    if (out.empty()) {
        throw UsageError("corpus directory " + dir.string() + " has no " + split + " images (expected " +
                         corpus_file(split, "clean", 0) + ")");
    }
    return out;
}

} // namespace

SyntheticImages read_corpus_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw UsageError("corpus directory not found: " + dir.string());
    return {read_split(dir, "train"), read_split(dir, "heldout")};
}

} // namespace qae::cli
