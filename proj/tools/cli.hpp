#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "narfima/conformal.hpp"
#include "narfima/narfima.hpp"

namespace narfima::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "NARFIMA_OUTPUT_DIR";

struct RunConfig {
    std::filesystem::path data;
    std::string target;
    std::vector<std::string> exogenous;
    std::string dataset_name;  // defaults to the data file stem
    std::vector<std::size_t> horizons = default_horizons();
    std::vector<std::string> models{"Naive", "NARFIMA"};
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "narfima_out";
    NarfimaConfig narfima;
    std::optional<std::size_t> validation_length;  // default max(h, 6)
    ConformalConfig conformal;
    bool alpha_set = false;

    nlohmann::json to_json() const;
    std::uint64_t hash() const;
};

// Relative data paths are resolved against `base_dir`. Unknown keys are errors.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Validation length used when fitting for horizon h.
std::size_t validation_length_for(const RunConfig& cfg, std::size_t h);

// Entry point shared by the executable and the tests. Returns the exit code.
int run(int argc, const char* const* argv);

}  // namespace narfima::cli
