#pragma once

#include <json.hpp>

#include "adt/experiment.hpp"

namespace adt::experiment::detail {

/// Canonical JSON form of a config; the basis for config_hash and the config
/// block of summary.json (nlohmann orders keys, so the bytes are stable).
nlohmann::json config_to_json(const ExperimentConfig& config);

}  // namespace adt::experiment::detail
