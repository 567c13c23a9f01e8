#pragma once

// "QIMG" raw image files: magic "QIMG", u32 LE channels, height, width, then
// channels*height*width binary32 LE values, channel-major then row-major.
// 16-bit grayscale PNG for viewing.

#include "qae/data.hpp"
#include "qae/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace qae {

std::vector<std::uint8_t> encode_qimg(const Tensor& image);
Tensor decode_qimg(std::span<const std::uint8_t> bytes);

void write_qimg(const std::filesystem::path& path, const Tensor& image);
Tensor read_qimg(const std::filesystem::path& path);

void write_png16(const std::filesystem::path& path, const Image16& image);
/// Reads 8- or 16-bit grayscale PNG, scaled to 16-bit.
Image16 read_png16(const std::filesystem::path& path);

/// Pixel values / 65535 as a 1-channel tensor.
Tensor image16_to_unit(const Image16& image);

} // namespace qae
