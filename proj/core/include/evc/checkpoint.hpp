#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "evc/evi_net.hpp"
#include "evc/vanilla_net.hpp"

namespace evc {

// "EVC1", then little-endian u32 {model-kind, N, d, F, class-count}, then the
// flat parameter vector as little-endian f32 in ParamLayout order.
using AnyNet = std::variant<BayesianNet, VanillaNet>;

std::vector<std::uint8_t> encode_checkpoint(const BayesianNet& net);
std::vector<std::uint8_t> encode_checkpoint(const VanillaNet& net);

/// Throws CheckpointError naming the first field that fails to decode.
AnyNet decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const BayesianNet& net);
void save_checkpoint(const std::filesystem::path& path, const VanillaNet& net);
AnyNet load_checkpoint(const std::filesystem::path& path);

}  // namespace evc
