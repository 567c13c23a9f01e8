#pragma once

#include "options.hpp"

#include "qae/experiments.hpp"
#include "qae/training.hpp"

namespace qae::cli {

std::vector<KeySpec> corpus_image_keys();
std::vector<KeySpec> corpus_patch_keys();
std::vector<KeySpec> training_keys(const std::string& default_epochs = "30");

CorpusSpec corpus_spec(const KeyValueConfig& cfg);
NoiseSpec noise_spec(const KeyValueConfig& cfg);

/// Reads the training keys. An empty lr_schedule resolves to the standard
/// schedule for the configured epoch count and is written back into `cfg`.
TrainConfig train_config(KeyValueConfig& cfg);

std::set<ParamGroup> parse_groups(const std::string& list);

/// gen-corpus output layout: <dir>/{train,heldout}/{clean,noisy}_NNN.qimg (HU).
std::string corpus_file(const std::string& split, const std::string& which, std::size_t index);
SyntheticImages read_corpus_dir(const std::filesystem::path& dir);

} // namespace qae::cli
