#include <gtest/gtest.h>

#include <fstream>

#include "json.hpp"

#include "hcod/config.hpp"
#include "hcod/errors.hpp"
#include "tmpdir.hpp"

using namespace hcod;
using nlohmann::json;

TEST(PipelineConfigJson, DefaultsFromEmptyObject) {
    const PipelineConfig cfg = pipeline_config_from_json(json::object());
    EXPECT_EQ(cfg.segment.encoder.sgtd_tau, 0.01);
    EXPECT_EQ(cfg.segment.encoder.patch_size, 8);
    EXPECT_EQ(cfg.segment.encoder.depth, 4);
    EXPECT_EQ(cfg.segment.encoder.channels, 64);
    EXPECT_EQ(cfg.segment.pyramid.levels, 7);
    EXPECT_EQ(cfg.segment.pyramid.used_levels, (std::vector<int>{2, 3, 4}));
    EXPECT_EQ(cfg.segment.xyz_bands, 33);
    EXPECT_FALSE(cfg.segment.fde_enabled);
    EXPECT_FALSE(cfg.weights.has_value());
}

TEST(PipelineConfigJson, ParsesAllFieldsAndRoundTrips) {
    const json j = json::parse(R"({
        "seed": 5, "tau": 0.003, "fde_enabled": true, "xyz_bands": 20,
        "encoder": {"patch_size": 4, "depth": 2, "channels": 16, "heads": 2, "prompt_layers": [1],
                    "drop_mode": "remove", "exclude_dropped_keys": false},
        "pyramid": {"levels": 6, "level_gap": 2, "used_levels": [1, 2]},
        "weights": {"blob": "w.bin", "manifest": "w.json"}
    })");
    const PipelineConfig cfg = pipeline_config_from_json(j);
    EXPECT_EQ(cfg.segment.encoder.seed, 5u);
    EXPECT_EQ(cfg.segment.encoder.sgtd_tau, 0.003);
    EXPECT_TRUE(cfg.segment.fde_enabled);
    EXPECT_EQ(cfg.segment.encoder.prompt_layers, (std::vector<int>{1}));
    EXPECT_EQ(cfg.segment.forward.mode, DropMode::Remove);
    EXPECT_EQ(cfg.segment.pyramid.level_gap, 2);
    ASSERT_TRUE(cfg.weights.has_value());
    EXPECT_EQ(cfg.weights->blob, "w.bin");

    const PipelineConfig again = pipeline_config_from_json(json::parse(to_json(cfg).dump()));
    EXPECT_EQ(to_json(again).dump(), to_json(cfg).dump());
}

TEST(PipelineConfigJson, StrictKeysTypesAndRanges) {
    EXPECT_THROW(pipeline_config_from_json(json::parse(R"({"bogus": 1})")), ValidationError);
    EXPECT_THROW(pipeline_config_from_json(json::parse(R"({"tau": "high"})")), ValidationError);
    EXPECT_THROW(pipeline_config_from_json(json::parse(R"({"tau": 1.5})")), ValidationError);
    EXPECT_THROW(pipeline_config_from_json(json::parse(R"({"encoder": {"heads": 3}})")), ValidationError);
    EXPECT_THROW(pipeline_config_from_json(json::parse(R"({"encoder": {"drop_mode": "hard"}})")), ValidationError);
    EXPECT_THROW(pipeline_config_from_json(json::parse(R"({"pyramid": {"used_levels": [5]}})")), ValidationError);
    EXPECT_THROW(pipeline_config_from_json(json::parse(R"({"weights": {"blob": "w.bin"}})")), ValidationError);
    EXPECT_THROW(pipeline_config_from_json(json::parse(R"({"xyz_bands": 0})")), ValidationError);
    EXPECT_THROW(pipeline_config_from_json(json::parse("[1, 2]")), ValidationError);
    EXPECT_NO_THROW(pipeline_config_from_json(json::parse(R"({"weights": null})")));
}

TEST(SceneSpecJson, ParsesAndRoundTrips) {
    const json j = json::parse(R"({"seed": 9, "height": 32, "width": 40, "bands": 12,
        "object_shape": "fragmented", "object_area_ratio": 0.1, "spectral_contrast": 0.2,
        "rgb_matched": true, "wavelength_min_nm": 420, "wavelength_max_nm": 720})");
    const SyntheticSceneSpec s = scene_spec_from_json(j);
    EXPECT_EQ(s.seed, 9u);
    EXPECT_EQ(s.width, 40);
    EXPECT_EQ(s.object_shape, ObjectShape::Fragmented);
    EXPECT_TRUE(s.rgb_matched);
    EXPECT_EQ(s.wavelength_max_nm, 720.0);
    EXPECT_EQ(to_json(scene_spec_from_json(json::parse(to_json(s).dump()))).dump(), to_json(s).dump());
    EXPECT_THROW(scene_spec_from_json(json::parse(R"({"colour": 1})")), ValidationError);
    EXPECT_THROW(scene_spec_from_json(json::parse(R"({"height": 1.5})")), ValidationError);
}

TEST(JsonFiles, ReadWriteAndErrors) {
    const auto dir = test::scratch_dir();
    nlohmann::ordered_json j;
    j["b"] = 1;
    j["a"] = "x";
    write_json_file(j, dir / "c.json");
    EXPECT_EQ(read_json_file(dir / "c.json")["a"], "x");
    // Insertion order is kept on disk.
    const std::string text = test::slurp(dir / "c.json");
    EXPECT_LT(text.find("\"b\""), text.find("\"a\""));
    EXPECT_THROW(read_json_file(dir / "absent.json"), IoError);
    std::ofstream(dir / "bad.json") << "{ not json";
    EXPECT_THROW(read_json_file(dir / "bad.json"), ValidationError);
}
