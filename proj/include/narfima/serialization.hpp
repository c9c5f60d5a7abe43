#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "narfima/arfimax.hpp"
#include "narfima/narfima.hpp"
#include "narfima/neuralnet.hpp"

namespace narfima {

inline constexpr int kFormatVersion = 1;

nlohmann::json to_json(const ArfimaxModel& model);
ArfimaxModel arfimax_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NetworkWeights& weights);
NetworkWeights network_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FeatureScaler& scaler);
FeatureScaler scaler_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NarfimaPipeline& pipeline);
NarfimaPipeline pipeline_from_json(const nlohmann::json& j);

// Pretty-printed with a trailing newline; byte-stable for equal inputs.
void save_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

void save_pipeline(const NarfimaPipeline& pipeline, const std::filesystem::path& path);
NarfimaPipeline load_pipeline(const std::filesystem::path& path);

}  // namespace narfima
