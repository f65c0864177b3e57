// Exit codes: 0 success, 2 user or input error, 3 internal invariant violation.

#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "json.hpp"

#include "commands.hpp"
#include "hcod/errors.hpp"

namespace {

using namespace hcod::cli;

constexpr int kExitUser = 2;
constexpr int kExitInternal = 3;

// Options shared by every command that builds the segmentation pipeline.
void add_pipeline_options(CLI::App* cmd, PipelineOverrides& o) {
    cmd->add_option("-c,--config", o.config, "JSON pipeline config; flags below override it")->check(CLI::ExistingFile);
    cmd->add_option("--tau", o.tau, "token dropout threshold in [0, 1]");
    cmd->add_option("--seed", o.seed, "weight initialisation seed");
    cmd->add_flag("--fde", o.fde, "also emit the detail-enhanced map");
    cmd->add_option("--weights", o.weights_blob, "weight blob to load instead of seeded initialisation");
    cmd->add_option("--weights-manifest", o.weights_manifest, "JSON manifest of the weight blob");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperspectral camouflaged object detection toolkit"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic scene: <name>.hsic, <name>_mask.png, "
                                                "<name>_manifest.json");
    c_synth->add_option("spec", synth.spec, "scene spec JSON")->required();
    c_synth->add_option("-o,--out", synth.out_dir, "output directory")->required();
    c_synth->add_option("--name", synth.name, "output file prefix (default: spec 'name' or file stem)");
    c_synth->add_option("--seed", synth.seed, "override the spec seed");

    DecomposeArgs dec;
    auto* c_dec = app.add_subcommand("decompose", "Write the XYZ image and the spectral saliency prompt");
    c_dec->add_option("inputs", dec.inputs, "HSIC cubes or directories of them")->required();
    c_dec->add_option("-o,--out", dec.out_dir, "output directory")->required();
    add_pipeline_options(c_dec, dec.pipeline);

    SegmentArgs seg;
    auto* c_seg = app.add_subcommand("segment", "Predict object maps: <stem>_pred.png (16-bit) and <stem>_pred.f32");
    c_seg->add_option("inputs", seg.inputs, "HSIC cubes or directories of them")->required();
    c_seg->add_option("-o,--out", seg.out_dir, "output directory")->required();
    add_pipeline_options(c_seg, seg.pipeline);

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Score predictions against masks (pairs matched by file stem)");
    c_eval->add_option("pred_dir", ev.pred_dir, "directory of <stem>_pred.{f32,png}")->required();
    c_eval->add_option("gt_dir", ev.gt_dir, "directory of <stem>_mask.png")->required();
    c_eval->add_option("-o,--out", ev.output, "metrics CSV path")->required();

    TauSweepArgs sweep;
    sweep.taus = {0.1, 0.03, 0.01, 0.003, 0.001};
    auto* c_sweep = app.add_subcommand("tau-sweep", "Segment and score a scene set at several dropout thresholds");
    c_sweep->add_option("data_dir", sweep.data_dir, "directory of <name>.hsic and <name>_mask.png")->required();
    c_sweep->add_option("-o,--out", sweep.output, "sweep CSV path")->required();
    c_sweep->add_option("--taus", sweep.taus, "thresholds, comma separated")->delimiter(',')->capture_default_str();
    add_pipeline_options(c_sweep, sweep.pipeline);

    StatsArgs st;
    auto* c_stats = app.add_subcommand("stats", "Mask statistics: stats.csv, hist.json, optional heatmap");
    c_stats->add_option("mask_dir", st.mask_dir, "directory of mask PNGs")->required();
    c_stats->add_option("-o,--out", st.out_dir, "output directory")->required();
    c_stats->add_flag("--heatmap", st.heatmap, "also write centroid_heatmap.png");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUser;
    }

    try {
        if (*c_synth) {
            cmd_synth(synth);
        } else if (*c_dec) {
            cmd_decompose(dec);
        } else if (*c_seg) {
            cmd_segment(seg);
        } else if (*c_eval) {
            cmd_eval(ev);
        } else if (*c_sweep) {
            cmd_tau_sweep(sweep);
        } else if (*c_stats) {
            cmd_stats(st);
        }
    } catch (const hcod::InvariantError& e) {
        std::fprintf(stderr, "hcod: internal error: %s\n", e.what());
        return kExitInternal;
    } catch (const hcod::ValidationError& e) {
        std::fprintf(stderr, "hcod: %s\n", e.what());
        return kExitUser;
    } catch (const hcod::FormatError& e) {
        std::fprintf(stderr, "hcod: %s\n", e.what());
        return kExitUser;
    } catch (const hcod::IoError& e) {
        std::fprintf(stderr, "hcod: %s\n", e.what());
        return kExitUser;
    } catch (const hcod::SpecError& e) {
        std::fprintf(stderr, "hcod: %s\n", e.what());
        return kExitUser;
    } catch (const hcod::DegenerateSpectrum& e) {
        std::fprintf(stderr, "hcod: %s\n", e.what());
        return kExitUser;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "hcod: bad JSON: %s\n", e.what());
        return kExitUser;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "hcod: %s\n", e.what());
        return kExitUser;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hcod: internal error: %s\n", e.what());
        return kExitInternal;
    }
    return 0;
}
