#pragma once

// "QAE1" checkpoint layout (all integers unsigned little-endian):
//
//   magic "QAE1" | version u8 (1) | kind u8 (0 conventional, 1 quadratic)
//   | channels u32 | kernel u32
//   | per layer: W_r, W_g, W_b, b_r, b_g, c   (conventional: W, b)
//
// Every parameter array is IEEE-754 binary32 little-endian in the in-memory
// order, shapes implied by (kind, channels, kernel). The activation is not
// stored; loaded models use ReLU unless the caller overrides it.

#include "qae/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace qae {

inline constexpr std::uint8_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize(const QAEModel& model);
/// Throws FormatError on bad magic, version, kind, header values, truncation or trailing bytes.
QAEModel deserialize(std::span<const std::uint8_t> bytes, const Activation& act = Activation::relu());

void save_checkpoint(const QAEModel& model, const std::filesystem::path& path);
QAEModel load_checkpoint(const std::filesystem::path& path, const Activation& act = Activation::relu());

/// Rounds every parameter to the nearest binary32 value, i.e. the values a
/// checkpoint round trip yields.
void round_to_float32(QAEModel& model);

} // namespace qae
