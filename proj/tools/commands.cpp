#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "hcod/datastats.hpp"
#include "hcod/errors.hpp"
#include "hcod/hsicube.hpp"
#include "hcod/io.hpp"
#include "hcod/metrics.hpp"
#include "hcod/parallel.hpp"
#include "hcod/pipeline.hpp"
#include "hcod/synth.hpp"

namespace hcod::cli {

namespace {

using ojson = nlohmann::ordered_json;

// Files with extension `ext` in a directory (sorted), or the path itself.
std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs, const std::string& ext) {
    std::vector<fs::path> out;
    for (const auto& p : inputs) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ext) {
                    found.push_back(e.path());
                }
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::exists(p)) {
            out.push_back(p);
        } else {
            throw IoError("no such file or directory: " + p.string());
        }
    }
    if (out.empty()) {
        throw ValidationError("no " + ext + " inputs found");
    }
    return out;
}

std::string strip_suffix(std::string s, const std::string& suffix) {
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
        s.resize(s.size() - suffix.size());
    }
    return s;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

Model load_model(const PipelineConfig& cfg) {
    Model m = init_model(cfg.segment);
    if (cfg.weights) {
        load_weights(m.parameters(), cfg.weights->blob, cfg.weights->manifest);
    }
    return m;
}

void check_prediction(const SaliencyMap& s, const std::string& who) {
    for (double v : s.data) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvariantError(who + ": prediction left [0, 1]");
        }
    }
}

}  // namespace

PipelineConfig resolve_config(const PipelineOverrides& o) {
    nlohmann::json j = nlohmann::json::object();
    if (o.config) {
        j = read_json_file(*o.config);
    }
    if (o.tau) {
        j["tau"] = *o.tau;
    }
    if (o.seed) {
        j["seed"] = *o.seed;
    }
    if (o.fde) {
        j["fde_enabled"] = true;
    }
    if (o.weights_blob || o.weights_manifest) {
        if (!o.weights_blob || !o.weights_manifest) {
            throw ValidationError("--weights and --weights-manifest must be given together");
        }
        j["weights"] = {{"blob", o.weights_blob->string()}, {"manifest", o.weights_manifest->string()}};
    }
    return pipeline_config_from_json(j);
}

void cmd_synth(const SynthArgs& a) {
    nlohmann::json j = read_json_file(a.spec);
    std::string name = a.spec.stem().string();
    if (j.is_object() && j.contains("name")) {
        if (!j["name"].is_string() || j["name"].get<std::string>().empty()) {
            throw ValidationError("scene spec: 'name' must be a nonempty string");
        }
        name = j["name"].get<std::string>();
        j.erase("name");
    }
    if (a.name) {
        name = *a.name;
    }
    if (a.seed) {
        j["seed"] = *a.seed;
    }
    const SyntheticSceneSpec spec = scene_spec_from_json(j);
    const SyntheticScene scene = generate_scene(spec);
    if (static_cast<long>(scene.mask.count()) != std::lround(spec.object_area_ratio * scene.mask.pixels())) {
        throw InvariantError("synth: mask area does not match the requested ratio");
    }

    ensure_dir(a.out_dir);
    const fs::path cube_path = a.out_dir / (name + ".hsic");
    const fs::path mask_path = a.out_dir / (name + "_mask.png");
    const fs::path manifest_path = a.out_dir / (name + "_manifest.json");
    save_cube(scene.cube, cube_path);
    write_mask_png(scene.mask, mask_path);

    ojson m;
    m["name"] = name;
    m["spec"] = to_json(spec);
    m["files"] = {{"cube", cube_path.filename().string()}, {"mask", mask_path.filename().string()}};
    m["foreground_pixels"] = scene.mask.count();
    m["area_ratio"] = static_cast<double>(scene.mask.count()) / static_cast<double>(scene.mask.pixels());
    m["wavelengths_nm"] = scene.cube.wavelengths_nm;
    m["background_spectrum"] = scene.background_spectrum;
    m["object_spectrum"] = scene.object_spectrum;
    write_json_file(m, manifest_path);
}

void cmd_decompose(const DecomposeArgs& a) {
    const PipelineConfig cfg = resolve_config(a.pipeline);
    const auto inputs = expand_inputs(a.inputs, ".hsic");
    ensure_dir(a.out_dir);
    parallel_for(inputs.size(), [&](size_t i) {
        const HsiCube cube = load_cube(inputs[i]);
        const Decomposition d = decompose(cube, cfg.segment);
        const std::string stem = inputs[i].stem().string();
        write_map_png16(d.xyz.normalized, a.out_dir / (stem + "_xyz.png"));
        write_raw_f32(d.xyz.normalized, a.out_dir / (stem + "_xyz.f32"));
        write_map_png16(d.saliency, a.out_dir / (stem + "_saliency.png"));
        write_raw_f32(d.saliency, a.out_dir / (stem + "_saliency.f32"));
    });
    write_json_file(to_json(cfg), a.out_dir / "decompose_config.json");
}

void cmd_segment(const SegmentArgs& a) {
    const PipelineConfig cfg = resolve_config(a.pipeline);
    const auto inputs = expand_inputs(a.inputs, ".hsic");
    const Model model = load_model(cfg);
    ensure_dir(a.out_dir);
    if (cfg.segment.fde_enabled) {
        ensure_dir(a.out_dir / "enhanced");
    }
    std::vector<double> kept(inputs.size());
    parallel_for(inputs.size(), [&](size_t i) {
        const HsiCube cube = load_cube(inputs[i]);
        const SegmentResult r = segment(cube, cfg.segment, model);
        check_prediction(r.s_f, "segment");
        const std::string stem = inputs[i].stem().string() + "_pred";
        write_map_png16(r.s_f, a.out_dir / (stem + ".png"));
        write_raw_f32(r.s_f, a.out_dir / (stem + ".f32"));
        if (r.s_d) {
            check_prediction(*r.s_d, "segment");
            write_map_png16(*r.s_d, a.out_dir / "enhanced" / (stem + ".png"));
            write_raw_f32(*r.s_d, a.out_dir / "enhanced" / (stem + ".f32"));
        }
        kept[i] = r.kept_fraction;
    });
    ojson summary = ojson::array();
    for (size_t i = 0; i < inputs.size(); ++i) {
        summary.push_back({{"input", inputs[i].filename().string()}, {"kept_fraction", kept[i]}});
    }
    ojson echo = to_json(cfg);
    echo["outputs"] = summary;
    write_json_file(echo, a.out_dir / "segment_config.json");
}

void cmd_eval(const EvalArgs& a) {
    for (const auto& d : {a.pred_dir, a.gt_dir}) {
        if (!fs::is_directory(d)) {
            throw IoError("not a directory: " + d.string());
        }
    }
    struct PredFiles {
        fs::path png;
        fs::path f32;
    };
    std::map<std::string, PredFiles> preds;
    std::map<std::string, fs::path> gts;
    for (const auto& e : fs::directory_iterator(a.pred_dir)) {
        const auto ext = e.path().extension();
        if (!e.is_regular_file() || (ext != ".png" && ext != ".f32")) {
            continue;
        }
        auto& slot = preds[strip_suffix(e.path().stem().string(), "_pred")];
        (ext == ".png" ? slot.png : slot.f32) = e.path();
    }
    for (const auto& e : fs::directory_iterator(a.gt_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") {
            gts[strip_suffix(e.path().stem().string(), "_mask")] = e.path();
        }
    }
    std::string offenders;
    for (const auto& [stem, files] : preds) {
        if (!gts.count(stem)) {
            offenders += "\n  prediction without ground truth: " + (files.f32.empty() ? files.png : files.f32).string();
        }
    }
    for (const auto& [stem, path] : gts) {
        if (!preds.count(stem)) {
            offenders += "\n  ground truth without prediction: " + path.string();
        }
    }
    if (!offenders.empty()) {
        throw ValidationError("unmatched files:" + offenders);
    }
    if (preds.empty()) {
        throw ValidationError("no prediction files in " + a.pred_dir.string());
    }

    std::vector<EvalPair> pairs;
    for (const auto& [stem, files] : preds) {
        EvalPair p;
        p.name = stem;
        p.pred = files.f32.empty() ? read_map_png(files.png) : read_raw_f32(files.f32);
        if (p.pred.channels != 1) {
            throw ValidationError("prediction " + stem + " has " + std::to_string(p.pred.channels) + " channels");
        }
        p.gt = read_mask_png(gts.at(stem));
        pairs.push_back(std::move(p));
    }
    const MetricReport report = evaluate_dataset(pairs);
    const fs::path dir = a.output.has_parent_path() ? a.output.parent_path() : fs::path(".");
    ensure_dir(dir);
    write_text(a.output, metrics_csv(report));
    write_json_file({{"pred_dir", a.pred_dir.string()}, {"gt_dir", a.gt_dir.string()}, {"pairs", pairs.size()}},
                    dir / "eval_config.json");
}

void cmd_tau_sweep(const TauSweepArgs& a) {
    PipelineConfig cfg = resolve_config(a.pipeline);
    if (a.taus.empty()) {
        throw ValidationError("tau-sweep: no tau values");
    }
    for (double t : a.taus) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw ValidationError("tau-sweep: tau must lie in [0, 1]");
        }
    }
    const auto cubes = expand_inputs({a.data_dir}, ".hsic");
    std::vector<Mask> gts;
    std::vector<Decomposition> decomps(cubes.size());
    for (const auto& c : cubes) {
        const fs::path gt = c.parent_path() / (c.stem().string() + "_mask.png");
        if (!fs::exists(gt)) {
            throw ValidationError("tau-sweep: missing ground truth " + gt.string());
        }
        gts.push_back(read_mask_png(gt));
    }
    parallel_for(cubes.size(), [&](size_t i) { decomps[i] = decompose(load_cube(cubes[i]), cfg.segment); });
    const Model model = load_model(cfg);

    std::string csv = "tau,mae,adp_f,e,s,kept_fraction\n";
    for (double tau : a.taus) {
        SegmentConfig seg = cfg.segment;
        seg.encoder.sgtd_tau = tau;
        std::vector<EvalPair> pairs(cubes.size());
        std::vector<double> kept(cubes.size());
        parallel_for(cubes.size(), [&](size_t i) {
            SegmentResult r = segment(decomps[i], seg, model);
            check_prediction(r.s_f, "tau-sweep");
            pairs[i] = {cubes[i].stem().string(), std::move(r.s_f), gts[i]};
            kept[i] = r.kept_fraction;
        });
        const MetricReport rep = evaluate_dataset(pairs);
        double kept_mean = 0.0;
        for (double k : kept) {
            kept_mean += k;
        }
        kept_mean /= static_cast<double>(kept.size());
        char buf[200];
        std::snprintf(buf, sizeof buf, "%.6g,%.6f,%.6f,%.6f,%.6f,%.6f\n", tau, rep.mean.mae, rep.mean.adp_f,
                      rep.mean.e_measure, rep.mean.s_measure, kept_mean);
        csv += buf;
    }
    const fs::path dir = a.output.has_parent_path() ? a.output.parent_path() : fs::path(".");
    ensure_dir(dir);
    write_text(a.output, csv);
    ojson echo = to_json(cfg);
    echo["taus"] = a.taus;
    echo["scenes"] = cubes.size();
    write_json_file(echo, dir / "tau_sweep_config.json");
}

void cmd_stats(const StatsArgs& a) {
    const auto files = expand_inputs({a.mask_dir}, ".png");
    std::vector<Mask> masks;
    std::vector<std::string> names;
    for (const auto& f : files) {
        masks.push_back(read_mask_png(f));
        names.push_back(strip_suffix(f.stem().string(), "_mask"));
    }
    const DatasetStats stats = dataset_stats(masks);
    for (const auto& s : stats.scenes) {
        if (s.is_tiny != (s.area_ratio < kTinyAreaThreshold) ||
            s.is_complex_edge != (s.edge_perimeter_ratio > kComplexEdgeThreshold)) {
            throw InvariantError("stats: flags disagree with ratios");
        }
    }
    ensure_dir(a.out_dir);
    write_text(a.out_dir / "stats.csv", stats_csv(stats, names));
    write_text(a.out_dir / "hist.json", stats_json(stats));
    if (a.heatmap) {
        constexpr int kScale = 16;
        const int peak = *std::max_element(stats.centroid_grid.begin(), stats.centroid_grid.end());
        Image img(kCentroidGrid * kScale, kCentroidGrid * kScale, 1);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                const int cell = stats.centroid_grid[static_cast<size_t>((y / kScale) * kCentroidGrid + x / kScale)];
                img.at(y, x) = static_cast<double>(cell) / peak;
            }
        }
        write_map_png16(img, a.out_dir / "centroid_heatmap.png");
    }
    write_json_file({{"mask_dir", a.mask_dir.string()}, {"masks", masks.size()}, {"heatmap", a.heatmap}},
                    a.out_dir / "stats_config.json");
}

}  // namespace hcod::cli
