#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace qae {

/// Writes to a sibling temp file and renames it over `path`, so readers never
/// see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

namespace le {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f32(std::vector<std::uint8_t>& out, float v);

/// Sequential little-endian reader; throws FormatError on truncation.
class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

    std::uint8_t u8();
    std::uint32_t u32();
    float f32();
    std::span<const std::uint8_t> take(std::size_t n);
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_{0};
    const char* what_;
};

} // namespace le
} // namespace qae
