#pragma once

// Every command option is a config key. A command's effective settings are
// its defaults, overlaid by --config FILE, overlaid by explicit flags; the
// merged result is written out as the run manifest, which can be passed back
// through --config to repeat the run.

#include "qae/config.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qae::cli {

/// Bad flags, unreadable inputs, invalid settings: exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A property check that did not hold: exit code 1.
class CheckFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KeySpec {
    std::string key;
    std::string fallback;
    std::string help;
};

struct GlobalFlags {
    bool quiet{false};
};

class CommandOptions {
public:
    CommandOptions(CLI::App& app, std::string command, std::vector<KeySpec> keys);

    /// Defaults < config file < flags. Throws UsageError.
    KeyValueConfig resolve() const;

    const std::string& command() const noexcept { return command_; }

private:
    std::string command_;
    std::vector<KeySpec> keys_;
    std::map<std::string, std::string> flag_values_;
    std::string config_path_;
};

/// Files are staged in memory and only written, each atomically, once the
/// command has succeeded. The manifest goes last.
class OutputSet {
public:
    void add(std::string name, std::vector<std::uint8_t> bytes);
    void add(std::string name, const std::string& text);
    void commit(const std::filesystem::path& dir, const KeyValueConfig& manifest, const std::string& command) const;

private:
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> files_;
};

inline constexpr const char* kManifestName = "manifest.txt";

std::string manifest_text(const KeyValueConfig& resolved, const std::string& command);

/// Wraps a typed config read so that bad values become usage errors.
template <class F>
auto setting(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::filesystem::path require_existing(const std::string& path, const std::string& what);

void say(const GlobalFlags& g, const std::string& line);

} // namespace qae::cli
