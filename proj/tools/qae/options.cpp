#include "options.hpp"

#include "qae/errors.hpp"
#include "qae/io_util.hpp"

#include <algorithm>
#include <iostream>
#include <set>

namespace qae::cli {

namespace {

std::string flag_name(const std::string& key) {
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

} // namespace

CommandOptions::CommandOptions(CLI::App& app, std::string command, std::vector<KeySpec> keys)
    : command_(std::move(command)), keys_(std::move(keys)) {
    app.add_option("--config", config_path_, "key = value settings file (e.g. a previous manifest.txt)");
    for (const KeySpec& k : keys_) {
        std::string help = k.help;
        if (!k.fallback.empty()) help += " [default: " + k.fallback + "]";
        app.add_option_function<std::string>(
            flag_name(k.key), [this, key = k.key](const std::string& v) { flag_values_[key] = v; }, help);
    }
}

KeyValueConfig CommandOptions::resolve() const {
    KeyValueConfig out;
    for (const KeySpec& k : keys_) out.set(k.key, k.fallback);
    if (!config_path_.empty()) {
        if (!std::filesystem::exists(config_path_)) throw UsageError("config file not found: " + config_path_);
        KeyValueConfig file;
        try {
            file = KeyValueConfig::load(config_path_);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
        std::set<std::string> known{"command", "version"};
        for (const KeySpec& k : keys_) known.insert(k.key);
        setting([&] {
            file.require_known(known);
            return 0;
        });
        if (auto c = file.get("command"); c && *c != command_) {
            throw UsageError(config_path_ + " is a manifest for '" + *c + "', not '" + command_ + "'");
        }
        for (const auto& [k, v] : file.values()) {
            if (k != "command" && k != "version") out.set(k, v);
        }
    }
    for (const auto& [k, v] : flag_values_) out.set(k, v);
    return out;
}

void OutputSet::add(std::string name, std::vector<std::uint8_t> bytes) {
    files_.emplace_back(std::move(name), std::move(bytes));
}

void OutputSet::add(std::string name, const std::string& text) {
    files_.emplace_back(std::move(name), std::vector<std::uint8_t>(text.begin(), text.end()));
}

void OutputSet::commit(const std::filesystem::path& dir, const KeyValueConfig& manifest,
                       const std::string& command) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, bytes] : files_) {
        std::filesystem::create_directories((dir / name).parent_path());
        write_file_atomic(dir / name, bytes);
    }
    write_file_atomic(dir / kManifestName, manifest_text(manifest, command));
}

std::string manifest_text(const KeyValueConfig& resolved, const std::string& command) {
    KeyValueConfig m = resolved;
    m.set("command", command);
    m.set("version", version());
    return m.to_text();
}

std::filesystem::path require_existing(const std::string& path, const std::string& what) {
    if (path.empty()) throw UsageError(what + " path is required");
    if (!std::filesystem::exists(path)) throw UsageError(what + " not found: " + path);
    return path;
}

void say(const GlobalFlags& g, const std::string& line) {
    if (!g.quiet) std::cout << line << '\n' << std::flush;
}

} // namespace qae::cli
