#pragma once

#include <vector>

#include "hcod/image.hpp"
#include "hcod/nn.hpp"
#include "hcod/tensor.hpp"
#include "hcod/tokenops.hpp"

namespace hcod {

// Pre-LN transformer block: h += MHSA(LN h); h += MLP(LN h).
struct EncoderBlock {
    LayerNorm norm_attn;
    Linear qkv;       // C -> 3C, [q | k | v]
    Linear attn_out;  // C -> C
    LayerNorm norm_mlp;
    Linear mlp_in;    // C -> 2C
    Linear mlp_out;   // 2C -> C
};

struct EncoderWeights {
    int patch_size = 0;
    int channels = 0;
    int heads = 0;
    Linear embed_img;   // p*p*3 -> C
    Linear embed_spec;  // p*p*3 -> C, nonnegative weights
    std::vector<EncoderBlock> blocks;
    std::vector<PromptBlock> prompts;  // one per block; unused where no SSCP is configured
    Linear decode;                     // C -> p*p logits

    std::vector<ParamRef> parameters();
};

// Deterministic initialisation from cfg.seed. The spectral embedding is drawn
// nonnegative so a token's channel mean grows with the saliency of its patch.
EncoderWeights init_encoder(const EncoderConfig& cfg, int image_channels = 3, int prompt_channels = 3);

enum class DropMode {
    Soft,    // dropped tokens enter attention as zero vectors
    Remove,  // dropped tokens are gathered out of the sequence before attention
};

struct ForwardOptions {
    DropMode mode = DropMode::Soft;
    // Soft mode only: exclude dropped tokens from the softmax denominator.
    bool exclude_dropped_keys = false;
};

// Optional diagnostics filled by encoder_forward.
struct ForwardTrace {
    // Per block: B x heads x N x N row-stochastic attention (Soft mode), or
    // the compacted kept x kept matrices concatenated per item (Remove mode).
    std::vector<std::vector<double>> attention;
    // Tokens entering the final SSCP fusion (after the last block), if any.
    TokenTensor pre_final_prompt;
    bool final_prompt_applied = false;
};

struct EncoderOutput {
    TokenTensor tokens;           // final image tokens
    TokenMask mask;               // SGTD keep mask
    TokenTensor spectral_tokens;  // X_S
    TokenScores scores;           // raw per-token SGTD scores
};

// One transformer block. `key_mask` (optional, B x N) excludes keys from the
// softmax; `attention` (optional) receives the probabilities.
TokenTensor encoder_block_forward(const TokenTensor& h, const EncoderBlock& block, int heads,
                                  const TokenMask* key_mask = nullptr, std::vector<double>* attention = nullptr);

EncoderOutput encoder_forward(const Image& i_m, const Image& i_s, const EncoderConfig& cfg,
                              const EncoderWeights& weights, const ForwardOptions& opts = {},
                              ForwardTrace* trace = nullptr);

// Logits clamp keeping sigmoid strictly inside (0, 1) in double precision.
inline constexpr double kLogitClamp = 30.0;

// Per-token projection to p*p logits, unpatchified onto the grid, sigmoid.
SaliencyMap decode_logits(const TokenTensor& tokens, const Linear& head, int patch, int batch_index = 0);
SaliencyMap decode_mask(const TokenTensor& tokens, const Linear& head, int patch, int batch_index = 0);

}  // namespace hcod
