#pragma once

#include "json.hpp"

#include "dualcap/model/config.hpp"
#include "dualcap/train/trainer.hpp"

namespace dualcap {

// ADL hooks so nlohmann::json converts the config structs directly. Reading
// starts from the defaults and overwrites only the fields present, so partial
// configs (CLI overrides) merge naturally.
void to_json(nlohmann::json& j, const ModelConfig& cfg);
void from_json(const nlohmann::json& j, ModelConfig& cfg);

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

}  // namespace dualcap
