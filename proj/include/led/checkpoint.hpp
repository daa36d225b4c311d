// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "led/adam.hpp"
#include "led/nn.hpp"

namespace led {

/// `.ledf` checkpoint layout (all integers and floats little-endian):
///   magic "LEDF" | format version u32 | semantic config digest u64
///   | canonical config text (u64 length + bytes), making the file
///     self-describing; the digest hashes the text's semantic core only
///   | completed epochs u64 | training RNG state u64 | Adam step i64
///   | tensor count u64
///   | per parameter: name (u64 length + bytes), rank u32, dims u64 each,
///     payload f64 each
///   | Adam first moments, then second moments, payloads only (shapes follow
///     the parameters)
/// The optimizer moments and RNG state are stored so a resumed run continues
/// bit-identically; the config text lets a checkpoint be evaluated without
/// the original file. Save -> load -> save is byte-identical.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t digest = 0;
  std::string config_text;
  std::uint64_t epoch = 0;
  std::uint64_t rng_state = 0;
};

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const std::vector<NamedParam>& params, const AdamState& adam);

/// Overwrites `params` (matched by position, with name and shape checked) and
/// `adam`, and returns the metadata. Throws on magic/version mismatch, a
/// digest that does not hash the stored text, or name/shape mismatches; if
/// `expect_digest` is nonzero it must equal the stored digest (the
/// config-compatibility check).
CheckpointMeta load_checkpoint(const std::string& path, std::uint64_t expect_digest,
                               const std::vector<NamedParam>& params, AdamState& adam);

/// Reads only the metadata block (cheap model-discovery for eval/sample).
CheckpointMeta read_checkpoint_meta(const std::string& path);

}  // namespace led
