#pragma once

// Flat "key = value" configuration text: one pair per line, '#' starts a
// comment, blank lines ignored. Keys are kept sorted so emitted text is
// byte-stable.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qae {

class KeyValueConfig {
public:
    KeyValueConfig() = default;

    /// Throws FormatError on malformed lines or duplicate keys.
    static KeyValueConfig parse(std::string_view text, const std::string& source = "config");
    static KeyValueConfig load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.contains(key); }
    std::optional<std::string> get(const std::string& key) const;
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    /// Throws ArgumentError naming the first key not in `known`.
    void require_known(const std::set<std::string>& known) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::size_t> get_size_list(const std::string& key, std::vector<std::size_t> fallback) const;
    std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const;

    std::string to_text() const;
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    /// Later entries win.
    void merge(const KeyValueConfig& other);

private:
    std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(std::string_view text, char sep = ',');
std::size_t parse_size_value(std::string_view text, std::string_view key);
double parse_double_value(std::string_view text, std::string_view key);

/// Library version string.
const char* version();

} // namespace qae
