#include "hcod/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>

#include "hcod/errors.hpp"

namespace hcod {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) {
        throw ValidationError(where + ": expected a JSON object");
    }
    for (const auto& item : j.items()) {
        bool known = false;
        for (auto k : allowed) {
            known = known || item.key() == k;
        }
        if (!known) {
            throw ValidationError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) {
        return;
    }
    const json& v = j.at(key);
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) {
                throw ValidationError("");
            }
        } else if constexpr (std::is_same_v<T, uint64_t>) {
            if (!v.is_number_unsigned()) {
                throw ValidationError("");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                throw ValidationError("");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) {
                throw ValidationError("");
            }
        }
        out = v.get<T>();
    } catch (const std::exception&) {
        throw ValidationError(where + ": key '" + std::string(key) + "' has the wrong type");
    }
}

DropMode parse_drop_mode(const std::string& s) {
    if (s == "soft") {
        return DropMode::Soft;
    }
    if (s == "remove") {
        return DropMode::Remove;
    }
    throw ValidationError("encoder.drop_mode: expected 'soft' or 'remove', got '" + s + "'");
}

}  // namespace

void validate(const PipelineConfig& cfg) {
    cfg.segment.encoder.validate();
    cfg.segment.pyramid.validate();
    if (cfg.segment.xyz_bands < 1) {
        throw ValidationError("xyz_bands must be positive");
    }
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig cfg;
    auto& seg = cfg.segment;
    auto& enc = seg.encoder;
    check_keys(j, {"seed", "tau", "fde_enabled", "xyz_bands", "encoder", "pyramid", "weights"}, "config");
    read(j, "seed", enc.seed, "config");
    read(j, "tau", enc.sgtd_tau, "config");
    read(j, "fde_enabled", seg.fde_enabled, "config");
    read(j, "xyz_bands", seg.xyz_bands, "config");
    if (j.contains("encoder")) {
        const json& e = j.at("encoder");
        check_keys(e,
                   {"patch_size", "depth", "channels", "heads", "prompt_layers", "drop_mode", "exclude_dropped_keys"},
                   "config.encoder");
        read(e, "patch_size", enc.patch_size, "config.encoder");
        read(e, "depth", enc.depth, "config.encoder");
        read(e, "channels", enc.channels, "config.encoder");
        read(e, "heads", enc.heads, "config.encoder");
        read(e, "prompt_layers", enc.prompt_layers, "config.encoder");
        std::string mode = "soft";
        read(e, "drop_mode", mode, "config.encoder");
        seg.forward.mode = parse_drop_mode(mode);
        read(e, "exclude_dropped_keys", seg.forward.exclude_dropped_keys, "config.encoder");
    }
    if (j.contains("pyramid")) {
        const json& p = j.at("pyramid");
        check_keys(p, {"levels", "level_gap", "used_levels"}, "config.pyramid");
        read(p, "levels", seg.pyramid.levels, "config.pyramid");
        read(p, "level_gap", seg.pyramid.level_gap, "config.pyramid");
        read(p, "used_levels", seg.pyramid.used_levels, "config.pyramid");
    }
    if (j.contains("weights") && !j.at("weights").is_null()) {
        const json& w = j.at("weights");
        check_keys(w, {"blob", "manifest"}, "config.weights");
        std::string blob;
        std::string manifest;
        read(w, "blob", blob, "config.weights");
        read(w, "manifest", manifest, "config.weights");
        if (blob.empty() || manifest.empty()) {
            throw ValidationError("config.weights: both 'blob' and 'manifest' are required");
        }
        cfg.weights = WeightPaths{blob, manifest};
    }
    validate(cfg);
    return cfg;
}

nlohmann::ordered_json to_json(const PipelineConfig& cfg) {
    const auto& seg = cfg.segment;
    const auto& enc = seg.encoder;
    nlohmann::ordered_json j;
    j["seed"] = enc.seed;
    j["tau"] = enc.sgtd_tau;
    j["fde_enabled"] = seg.fde_enabled;
    j["xyz_bands"] = seg.xyz_bands;
    j["encoder"] = {{"patch_size", enc.patch_size},
                    {"depth", enc.depth},
                    {"channels", enc.channels},
                    {"heads", enc.heads},
                    {"prompt_layers", enc.prompt_layers},
                    {"drop_mode", seg.forward.mode == DropMode::Soft ? "soft" : "remove"},
                    {"exclude_dropped_keys", seg.forward.exclude_dropped_keys}};
    j["pyramid"] = {{"levels", seg.pyramid.levels},
                    {"level_gap", seg.pyramid.level_gap},
                    {"used_levels", seg.pyramid.used_levels}};
    if (cfg.weights) {
        j["weights"] = {{"blob", cfg.weights->blob.string()}, {"manifest", cfg.weights->manifest.string()}};
    } else {
        j["weights"] = nullptr;
    }
    return j;
}

SyntheticSceneSpec scene_spec_from_json(const json& j) {
    SyntheticSceneSpec s;
    const std::string where = "scene spec";
    check_keys(j,
               {"seed", "height", "width", "bands", "object_shape", "object_area_ratio", "spectral_contrast",
                "rgb_matched", "wavelength_min_nm", "wavelength_max_nm"},
               where);
    read(j, "seed", s.seed, where);
    read(j, "height", s.height, where);
    read(j, "width", s.width, where);
    read(j, "bands", s.bands, where);
    std::string shape = to_string(s.object_shape);
    read(j, "object_shape", shape, where);
    s.object_shape = parse_object_shape(shape);
    read(j, "object_area_ratio", s.object_area_ratio, where);
    read(j, "spectral_contrast", s.spectral_contrast, where);
    read(j, "rgb_matched", s.rgb_matched, where);
    read(j, "wavelength_min_nm", s.wavelength_min_nm, where);
    read(j, "wavelength_max_nm", s.wavelength_max_nm, where);
    return s;
}

nlohmann::ordered_json to_json(const SyntheticSceneSpec& s) {
    return {{"seed", s.seed},
            {"height", s.height},
            {"width", s.width},
            {"bands", s.bands},
            {"object_shape", to_string(s.object_shape)},
            {"object_area_ratio", s.object_area_ratio},
            {"spectral_contrast", s.spectral_contrast},
            {"rgb_matched", s.rgb_matched},
            {"wavelength_min_nm", s.wavelength_min_nm},
            {"wavelength_max_nm", s.wavelength_max_nm}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const nlohmann::ordered_json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

}  // namespace hcod
