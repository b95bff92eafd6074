#pragma once

#include <string>

#include "adt/model.hpp"

namespace adt::model {

/// Serialises a snapshot: a JSON header (kind, dimensions, seed, step, block
/// table) followed by every parameter block as flat little-endian float32.
void save_snapshot(const ModelSnapshot& snapshot, const std::string& path);

/// Inverse of save_snapshot. Parameters round-trip through float32, so values
/// match to ~1e-7 relative precision. Corrupt or truncated files raise
/// std::runtime_error.
ModelSnapshot load_snapshot(const std::string& path);

}  // namespace adt::model
