#pragma once

#include <optional>
#include <vector>

#include "hcod/encoder.hpp"
#include "hcod/fde.hpp"
#include "hcod/hsicube.hpp"
#include "hcod/image.hpp"
#include "hcod/ssdm.hpp"

namespace hcod {

struct SegmentConfig {
    EncoderConfig encoder;
    PyramidConfig pyramid;
    ForwardOptions forward;
    int xyz_bands = kDefaultXyzBands;
    bool fde_enabled = false;  // also produce the enhanced map S_d
};

struct Model {
    EncoderWeights encoder;
    FdeParams fde;
    std::vector<ParamRef> parameters();
};

// Encoder from cfg.encoder.seed; FDE from the same seed on its own stream.
Model init_model(const SegmentConfig& cfg);

struct Decomposition {
    XyzImage xyz;           // spatial branch input I_M = xyz.normalized
    SaliencyMap saliency;   // spectral prompt I_S
};

Decomposition decompose(const HsiCube& cube, const SegmentConfig& cfg);

struct SegmentResult {
    SaliencyMap s_f;
    std::optional<SaliencyMap> s_d;
    TokenMask mask;
    double kept_fraction = 1.0;
};

SegmentResult segment(const Decomposition& d, const SegmentConfig& cfg, const Model& model);
SegmentResult segment(const HsiCube& cube, const SegmentConfig& cfg, const Model& model);

// ---- Desk-scale training of the decode head and the final prompt block ----

// Per-scene quantities that stay fixed while only the head is trained: the
// tokens entering the final fusion, the spectral tokens, and the frozen
// detail residual r with S_d = clamp(S_f + r, 0, 1).
struct HeadCache {
    TokenTensor pre_final;
    TokenTensor spectral;
    Image detail;
    Mask gt;
    bool has_final_prompt = false;
};

HeadCache make_head_cache(const Decomposition& d, const Mask& gt, const SegmentConfig& cfg, const Model& model);

// Decode weight/bias, then (if the last block is followed by a prompt)
// fuse_in and fuse_out weight/bias of that prompt block.
std::vector<ParamRef> trainable_parameters(Model& model, const SegmentConfig& cfg);

// Total loss of S_d and S_f against the cached ground truth. With `grads`,
// also returns d loss / d parameter in trainable_parameters order.
double head_loss(const Model& model, const SegmentConfig& cfg, const HeadCache& cache,
                 std::vector<std::vector<double>>* grads = nullptr);

struct TrainConfig {
    int steps = 200;
    double learning_rate = 0.5;
};

// Full-batch gradient descent on the mean head loss over all caches.
// Returns the mean loss before each step.
std::vector<double> train_head(Model& model, const SegmentConfig& cfg, const std::vector<HeadCache>& caches,
                               const TrainConfig& train);

}  // namespace hcod
