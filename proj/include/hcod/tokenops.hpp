#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hcod/image.hpp"
#include "hcod/nn.hpp"
#include "hcod/tensor.hpp"

namespace hcod {

struct EncoderConfig {
    int patch_size = 8;
    int depth = 4;
    int channels = 64;
    int heads = 4;
    std::vector<int> prompt_layers;  // blocks followed by SSCP; empty = every block
    double sgtd_tau = 0.01;
    uint64_t seed = 0;

    void validate() const;
    bool prompts_after(int block) const;
};

// Non-overlapping p x p patches, flattened in (dy, dx, channel) order and
// projected by `proj` (input width p*p*channels). Grid is row-major.
// All images must share one shape; each becomes one batch item.
TokenTensor patchify(std::span<const Image> images, const Linear& proj, int patch);
TokenTensor patchify(const Image& image, const Linear& proj, int patch);

// ---- Spectral-guided token dropout ---------------------------------------

// Channel mean per token.
TokenScores sgtd_score(const TokenTensor& x_s);

// Min-max normalization per batch item. A flat item maps to all ones so that
// uninformative saliency keeps every token.
TokenScores normalize_scores(const TokenScores& scores);

// keep = (score >= tau) on already-normalized scores.
TokenMask threshold_scores(const TokenScores& normalized, double tau);

// normalize_scores followed by threshold_scores.
TokenMask sgtd_mask(const TokenScores& scores, double tau);

// Dropped tokens become exact zeros; kept tokens are copied bit-for-bit.
TokenTensor sgtd_apply(const TokenTensor& x_m, const TokenMask& mask);

// ---- Spectral-spatial complementary prompting ------------------------------

// Prompt block: LN on both streams, concat -> 1x1 conv -> GELU -> 1x1 conv.
struct PromptBlock {
    LayerNorm norm_img;
    LayerNorm norm_spec;
    Linear fuse_in;   // 2C -> C
    Linear fuse_out;  // C -> C, zero at initialisation

    explicit PromptBlock(int channels = 0)
        : norm_img(channels), norm_spec(channels), fuse_in(2 * channels, channels), fuse_out(channels, channels) {}
};

PromptBlock init_prompt_block(int channels, const CounterRng& rng);

// Token-to-feature reshape (B x N x C -> B x C x rows x cols) and its inverse.
FeatureMap tokens_to_features(const TokenTensor& t);
TokenTensor features_to_tokens(const FeatureMap& f);

// h_m + phi^-1(P(concat(phi(LN h_m), phi(LN x_s)))). The residual is added to
// the un-normalized h_m.
TokenTensor sscp_fuse(const TokenTensor& h_m, const TokenTensor& x_s, const PromptBlock& block);

// Intermediate values of the fusion, for callers that need them (training).
struct SscpActivations {
    FeatureMap concat;      // B x 2C x h x w
    FeatureMap pre_gelu;    // B x C x h x w
    FeatureMap hidden;      // GELU(pre_gelu)
    FeatureMap fused;       // B x C x h x w
};
TokenTensor sscp_fuse(const TokenTensor& h_m, const TokenTensor& x_s, const PromptBlock& block,
                      SscpActivations& act);

}  // namespace hcod
