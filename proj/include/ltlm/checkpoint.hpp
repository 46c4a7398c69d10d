#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ltlm/model.hpp"

namespace ltlm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
    std::uint64_t vocab_hash = 0;
    std::int64_t epoch = 0;
    double lr = 0.0;
    std::uint64_t seed = 0;
};

struct Checkpoint {
    ModelConfig config;
    ModelParameters params;
    CheckpointMeta meta;
    std::optional<IdfTable> idf; // present for word-dependent models
};

// Binary format, little-endian:
//   magic "LTLM", uint32 version,
//   uint32 header length + header bytes (config/meta as key=value lines),
//   uint32 tensor count,
//   per tensor: uint32 name length, name, uint64 rows, uint64 cols,
//               rows*cols IEEE-754 binary64 values,
//   uint64 FNV-1a checksum over everything after the version field.
// save/load round-trips are bitwise exact. Loading reports unsupported
// versions, truncation and checksum mismatches as distinct errors.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

} // namespace ltlm
