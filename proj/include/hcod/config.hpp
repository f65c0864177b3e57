#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "hcod/pipeline.hpp"
#include "hcod/synth.hpp"

namespace hcod {

struct WeightPaths {
    std::filesystem::path blob;
    std::filesystem::path manifest;
};

// Everything `segment`, `decompose` and `tau-sweep` need. `tau` and `seed`
// mirror segment.encoder.sgtd_tau / segment.encoder.seed.
struct PipelineConfig {
    SegmentConfig segment;
    std::optional<WeightPaths> weights;
};

// Unknown keys and ill-typed values throw ValidationError; missing keys keep
// their defaults. The result is validated.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const PipelineConfig& cfg);
void validate(const PipelineConfig& cfg);

SyntheticSceneSpec scene_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SyntheticSceneSpec& spec);

// Parses a JSON file; IoError if unreadable, ValidationError if malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::ordered_json& j, const std::filesystem::path& path);

}  // namespace hcod
