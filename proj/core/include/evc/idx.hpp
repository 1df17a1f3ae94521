#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "evc/tensor.hpp"

namespace evc::idx {

inline constexpr std::uint32_t kLabelMagic = 0x00000801;  // 1-D u8
inline constexpr std::uint32_t kImageMagic = 0x00000803;  // 3-D u8

/// Parses a 3-D u8 IDX image file into a [count x rows x cols] tensor scaled by 1/255.
Tensor parse_images(std::span<const std::uint8_t> bytes);

/// Parses a 1-D u8 IDX label file.
std::vector<std::uint8_t> parse_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_labels(std::span<const std::uint8_t> labels);
// Pixels are clamped to [0,1] and rounded to the nearest u8 level.
std::vector<std::uint8_t> encode_images(const Tensor& images);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace evc::idx
