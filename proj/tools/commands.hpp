#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hcod/config.hpp"

namespace hcod::cli {

namespace fs = std::filesystem;

// Flag values that override the JSON config when present.
struct PipelineOverrides {
    std::optional<fs::path> config;
    std::optional<double> tau;
    std::optional<uint64_t> seed;
    bool fde = false;
    std::optional<fs::path> weights_blob;
    std::optional<fs::path> weights_manifest;
};

PipelineConfig resolve_config(const PipelineOverrides& o);

struct SynthArgs {
    fs::path spec;
    fs::path out_dir;
    std::optional<std::string> name;
    std::optional<uint64_t> seed;
};
void cmd_synth(const SynthArgs& a);

struct DecomposeArgs {
    std::vector<fs::path> inputs;
    fs::path out_dir;
    PipelineOverrides pipeline;
};
void cmd_decompose(const DecomposeArgs& a);

struct SegmentArgs {
    std::vector<fs::path> inputs;
    fs::path out_dir;
    PipelineOverrides pipeline;
};
void cmd_segment(const SegmentArgs& a);

struct EvalArgs {
    fs::path pred_dir;
    fs::path gt_dir;
    fs::path output;  // metrics CSV
};
void cmd_eval(const EvalArgs& a);

struct TauSweepArgs {
    fs::path data_dir;  // <name>.hsic with <name>_mask.png
    fs::path output;    // sweep CSV
    std::vector<double> taus;
    PipelineOverrides pipeline;
};
void cmd_tau_sweep(const TauSweepArgs& a);

struct StatsArgs {
    fs::path mask_dir;
    fs::path out_dir;
    bool heatmap = false;
};
void cmd_stats(const StatsArgs& a);

}  // namespace hcod::cli
