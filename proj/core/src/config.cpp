#include "qae/config.hpp"

#include "qae/errors.hpp"
#include "qae/io_util.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#ifndef QAE_VERSION_STRING
#define QAE_VERSION_STRING "0.0.0"
#endif

namespace qae {

const char* version() { return QAE_VERSION_STRING; }

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace

std::vector<std::string> split_list(std::string_view text, char sep) {
    std::vector<std::string> out;
    if (trim(text).empty()) return out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        out.emplace_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::size_t parse_size_value(std::string_view text, std::string_view key) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ArgumentError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
}

double parse_double_value(std::string_view text, std::string_view key) {
    const std::string s(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    if (s == "inf") return std::numeric_limits<double>::infinity();
    throw ArgumentError(std::string(key) + ": expected a number, got '" + s + "'");
}

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& source) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw FormatError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw FormatError(source + ":" + std::to_string(line_no) + ": empty key");
        if (cfg.values_.contains(key)) {
            throw FormatError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        cfg.values_[key] = std::string(trim(line.substr(eq + 1)));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = read_file(path);
    } catch (const std::runtime_error& e) {
        throw ArgumentError(e.what());
    }
    return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    return std::nullopt;
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
        if (!known.contains(k)) throw ArgumentError("unknown configuration key '" + k + "'");
    }
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

std::size_t KeyValueConfig::get_size(const std::string& key, std::size_t fallback) const {
    auto v = get(key);
    return v ? parse_size_value(*v, key) : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size() || v->empty()) {
        throw ArgumentError(key + ": expected an unsigned integer, got '" + *v + "'");
    }
    return out;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    return v ? parse_double_value(*v, key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ArgumentError(key + ": expected true/false, got '" + *v + "'");
}

std::vector<std::size_t> KeyValueConfig::get_size_list(const std::string& key,
                                                       std::vector<std::size_t> fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::vector<std::size_t> out;
    for (const std::string& item : split_list(*v)) out.push_back(parse_size_value(item, key));
    return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key, std::vector<double> fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const std::string& item : split_list(*v)) out.push_back(parse_double_value(item, key));
    return out;
}

std::string KeyValueConfig::to_text() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
    return out.str();
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
}

} // namespace qae
