#pragma once

#include <cstdint>
#include <filesystem>

#include "stc/autodiff/param_store.hpp"

namespace stc::ad {

/// Byte layout (all integers little-endian):
///
///   magic     4 bytes  "STCK"
///   version   u32      kCheckpointVersion
///   cfg_hash  u64      hash of the model-defining configuration
///   epoch     u64      epochs completed when written
///   count     u32      number of entries
///   entries   count x { name: u32 len + bytes, trainable: u8,
///                       rank: u32, extents: rank x u64,
///                       values: prod(extents) x f64 }
///
/// Entries are written in ParamStore (lexicographic) order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t epoch = 0;
};

struct Checkpoint {
  CheckpointHeader header;
  ParamStore params;
};

std::vector<char> encode_checkpoint(const ParamStore& params, const CheckpointHeader& header);
Checkpoint decode_checkpoint(std::vector<char> bytes);

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const CheckpointHeader& header);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace stc::ad
