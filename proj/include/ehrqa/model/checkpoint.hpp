#pragma once

#include <filesystem>

#include <json.hpp>

#include "ehrqa/model/transformer.hpp"

namespace ehrqa {

// Text header (format tag, config as JSON, parameter count) followed by the
// parameters as raw 64-bit doubles. Throws IoError or ParseError.
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

// model.meta: model and training configuration plus every seed, as JSON.
void write_model_meta(const std::filesystem::path& path, const ModelConfig& mcfg,
                      const TrainConfig& tcfg, const nlohmann::json& extra = nlohmann::json::object());

}  // namespace ehrqa
