#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qodc/nn.hpp"

namespace qodc {

/// Binary layout, all integers and floats little-endian:
///
///   char[8]  magic "QODCCKPT"
///   u32      format version (1)
///   u32      feature_dim, u32 action_dim
///   u32      hidden layer count H, then H x u32 widths
///   f64      log_std_init
///   u64      parameter count P, then P x f64 parameters
///   i64      optimizer step, then P x f64 first moments, P x f64 second moments
struct Checkpoint {
  PolicySpec spec;
  Eigen::VectorXd params;
  AdamState adam;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qodc
