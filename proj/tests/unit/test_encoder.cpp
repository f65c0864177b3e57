#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "gen.hpp"
#include "hcod/encoder.hpp"
#include "hcod/errors.hpp"
#include "reference.hpp"

using namespace hcod;

namespace {

EncoderConfig small_config(uint64_t seed = 1) {
    EncoderConfig cfg;
    cfg.patch_size = 4;
    cfg.depth = 2;
    cfg.channels = 8;
    cfg.heads = 2;
    cfg.seed = seed;
    return cfg;
}

void randomize(EncoderBlock& b, test::Gen& g) {
    for (Linear* l : {&b.qkv, &b.attn_out, &b.mlp_in, &b.mlp_out}) {
        l->weight = g.vec(l->weight.size(), -0.6, 0.6);
        l->bias = g.vec(l->bias.size(), -0.3, 0.3);
    }
    b.norm_attn.gamma = g.vec(b.norm_attn.gamma.size(), 0.5, 1.5);
    b.norm_mlp.beta = g.vec(b.norm_mlp.beta.size(), -0.2, 0.2);
}

}  // namespace

TEST(EncoderBlock, MatchesMatrixOracle) {
    test::Gen g(51);
    for (int trial = 0; trial < 10; ++trial) {
        const EncoderConfig cfg = small_config(static_cast<uint64_t>(trial));
        EncoderWeights w = init_encoder(cfg);
        randomize(w.blocks[0], g);
        const TokenTensor h = g.tokens(2, 3, 3, cfg.channels);
        const TokenTensor got = encoder_block_forward(h, w.blocks[0], cfg.heads);
        const TokenTensor want = ref::block_forward(h, w.blocks[0], cfg.heads);
        EXPECT_LE(test::max_abs_diff(got.data, want.data), 1e-10);
    }
}

TEST(EncoderBlock, AttentionRowsAreStochasticAndRespectKeyMask) {
    test::Gen g(52);
    const EncoderConfig cfg = small_config();
    EncoderWeights w = init_encoder(cfg);
    randomize(w.blocks[0], g);
    const TokenTensor h = g.tokens(1, 2, 3, cfg.channels);
    TokenMask keys(1, 6);
    keys.at(0, 1) = 0;
    keys.at(0, 4) = 0;
    std::vector<double> attn;
    encoder_block_forward(h, w.blocks[0], cfg.heads, &keys, &attn);
    ASSERT_EQ(attn.size(), 2u * 6 * 6);
    for (int row = 0; row < 12; ++row) {
        double s = 0;
        for (int j = 0; j < 6; ++j) {
            const double p = attn[row * 6 + j];
            if (j == 1 || j == 4) {
                EXPECT_EQ(p, 0.0);
            } else {
                EXPECT_GT(p, 0.0);
            }
            s += p;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Encoder, InitialisationIsDeterministicWithNonnegativeSpectralEmbedding) {
    const EncoderConfig cfg = small_config(9);
    EncoderWeights a = init_encoder(cfg);
    EncoderWeights b = init_encoder(cfg);
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    std::set<std::string> names;
    for (size_t i = 0; i < pa.size(); ++i) {
        EXPECT_EQ(*pa[i].values, *pb[i].values) << pa[i].name;
        EXPECT_TRUE(names.insert(pa[i].name).second) << pa[i].name;
        size_t n = 1;
        for (int d : pa[i].shape) n *= static_cast<size_t>(d);
        EXPECT_EQ(n, pa[i].values->size()) << pa[i].name;
    }
    for (double v : a.embed_spec.weight) EXPECT_GE(v, 0.0);
    for (const auto& p : a.prompts) {
        for (double v : p.fuse_out.weight) EXPECT_EQ(v, 0.0);
    }
    EncoderWeights c = init_encoder(small_config(10));
    EXPECT_NE(c.embed_img.weight, a.embed_img.weight);
}

TEST(Encoder, ZeroPromptOutputLayersLeaveTokensUnchanged) {
    test::Gen g(53);
    EncoderConfig all = small_config(3);
    EncoderConfig last = all;
    last.prompt_layers = {all.depth - 1};
    const EncoderWeights w = init_encoder(all);
    const Image i_m = g.image(8, 12, 3);
    const Image i_s = g.image(8, 12, 3);
    const auto a = encoder_forward(i_m, i_s, all, w);
    const auto b = encoder_forward(i_m, i_s, last, w);
    EXPECT_EQ(a.tokens, b.tokens);
}

TEST(Encoder, TraceRecordsAttentionAndFinalPromptInput) {
    test::Gen g(54);
    const EncoderConfig cfg = small_config(4);
    const EncoderWeights w = init_encoder(cfg);
    ForwardTrace trace;
    const auto out = encoder_forward(g.image(8, 8, 3), g.image(8, 8, 3), cfg, w, {}, &trace);
    ASSERT_EQ(trace.attention.size(), 2u);
    EXPECT_EQ(trace.attention[0].size(), 2u * 4 * 4);
    EXPECT_TRUE(trace.final_prompt_applied);
    // Zero fuse_out: the last fusion is the identity.
    EXPECT_EQ(trace.pre_final_prompt, out.tokens);
    EXPECT_EQ(out.mask.tokens, 4);
}

TEST(Encoder, RemoveModeMatchesSoftModeWithExcludedKeysOnKeptTokens) {
    test::Gen g(55);
    for (int trial = 0; trial < 10; ++trial) {
        EncoderConfig cfg = small_config(static_cast<uint64_t>(20 + trial));
        cfg.sgtd_tau = 0.4;
        EncoderWeights w = init_encoder(cfg);
        for (auto& b : w.blocks) randomize(b, g);
        const Image i_m = g.image(12, 12, 3);
        const Image i_s = g.image(12, 12, 3);
        ForwardOptions soft{DropMode::Soft, true};
        ForwardOptions remove{DropMode::Remove, false};
        const auto a = encoder_forward(i_m, i_s, cfg, w, soft);
        const auto b = encoder_forward(i_m, i_s, cfg, w, remove);
        ASSERT_EQ(a.mask, b.mask);
        ASSERT_LT(a.mask.kept_fraction(), 1.0);
        for (int n = 0; n < a.tokens.tokens; ++n) {
            if (!a.mask.at(0, n)) continue;
            for (int c = 0; c < cfg.channels; ++c) {
                EXPECT_NEAR(a.tokens.at(0, n, c), b.tokens.at(0, n, c), 1e-12);
            }
        }
    }
}

TEST(Encoder, RejectsMismatchedInputs) {
    test::Gen g(56);
    const EncoderConfig cfg = small_config();
    const EncoderWeights w = init_encoder(cfg);
    EXPECT_THROW(encoder_forward(g.image(8, 8, 3), g.image(8, 12, 3), cfg, w), ValidationError);
    EncoderConfig other = cfg;
    other.depth = 3;
    EXPECT_THROW(encoder_forward(g.image(8, 8, 3), g.image(8, 8, 3), other, w), ValidationError);
}

TEST(Decode, LogitsLandOnPatchGrid) {
    test::Gen g(57);
    const TokenTensor t = g.tokens(1, 2, 3, 5);
    Linear head(5, 4);
    head.weight = g.vec(20, -1, 1);
    head.bias = g.vec(4, -1, 1);
    const SaliencyMap logits = decode_logits(t, head, 2);
    EXPECT_EQ(logits.height, 4);
    EXPECT_EQ(logits.width, 6);
    for (int n = 0; n < 6; ++n) {
        for (int k = 0; k < 4; ++k) {
            double s = head.bias[k];
            for (int c = 0; c < 5; ++c) s += head.w(k, c) * t.at(0, n, c);
            EXPECT_NEAR(logits.at((n / 3) * 2 + k / 2, (n % 3) * 2 + k % 2), s, 1e-12);
        }
    }
    EXPECT_THROW(decode_logits(t, head, 3), ValidationError);
    EXPECT_THROW(decode_logits(t, head, 2, 1), ValidationError);
}

TEST(Decode, MaskStaysStrictlyInsideUnitInterval) {
    TokenTensor t(1, 1, 1, 1);
    t.data[0] = 1.0;
    Linear head(1, 4);
    head.weight = {1e6, -1e6, 0.0, 2.0};
    const SaliencyMap s = decode_mask(t, head, 2);
    for (double v : s.data) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
    EXPECT_NEAR(s.data[2], 0.5, 1e-15);
    EXPECT_NEAR(s.data[3], 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(Encoder, ShapeAndDeterminism) {
    test::Gen g(58);
    const EncoderConfig cfg = small_config(5);
    const EncoderWeights w = init_encoder(cfg);
    const Image i_m = g.image(16, 8, 3);
    const Image i_s = g.image(16, 8, 3);
    const auto a = encoder_forward(i_m, i_s, cfg, w);
    const auto b = encoder_forward(i_m, i_s, cfg, init_encoder(cfg));
    EXPECT_EQ(a.tokens.batch, 1);
    EXPECT_EQ(a.tokens.tokens, 8);
    EXPECT_EQ(a.tokens.channels, cfg.channels);
    EXPECT_EQ(a.tokens, b.tokens);
    EXPECT_EQ(a.mask, b.mask);
}

TEST(Encoder, SoftMaskingEqualsForwardWithZeroedTokens) {
    test::Gen g(59);
    EncoderConfig cfg = small_config(6);
    cfg.depth = 1;
    cfg.sgtd_tau = 0.5;
    EncoderWeights w = init_encoder(cfg);
    randomize(w.blocks[0], g);
    const Image i_m = g.image(12, 12, 3);
    const Image i_s = g.image(12, 12, 3);
    const auto out = encoder_forward(i_m, i_s, cfg, w);
    ASSERT_LT(out.mask.kept_fraction(), 1.0);
    const TokenTensor x_m = patchify(i_m, w.embed_img, cfg.patch_size);
    const TokenTensor want = ref::block_forward(sgtd_apply(x_m, out.mask), w.blocks[0], cfg.heads);
    // Prompt output layer is zero, so the fusion adds nothing.
    EXPECT_LE(test::max_abs_diff(out.tokens.data, want.data), 1e-10);
}

TEST(Encoder, RaisingTauOnlyActsThroughDroppedTokens) {
    test::Gen g(60);
    EncoderConfig lo = small_config(7);
    lo.sgtd_tau = 0.0;
    const EncoderWeights w = init_encoder(lo);
    const Image i_m = g.image(12, 12, 3);
    const Image i_s = g.image(12, 12, 3);
    const auto a = encoder_forward(i_m, i_s, lo, w);
    const TokenScores z = normalize_scores(a.scores);
    double second = 2.0;
    for (double v : z.data) {
        if (v > 0.0) second = std::min(second, v);
    }
    EncoderConfig hi = lo;
    hi.sgtd_tau = 0.5 * second;
    const auto b = encoder_forward(i_m, i_s, hi, w);
    int dropped = 0;
    for (int n = 0; n < b.mask.tokens; ++n) dropped += b.mask.at(0, n) == 0;
    EXPECT_EQ(dropped, 1);
    EXPECT_NE(a.tokens, b.tokens);

    // Feeding the zeroed token explicitly at tau = 0 reproduces the result.
    const TokenTensor x_m = patchify(i_m, w.embed_img, lo.patch_size);
    TokenTensor h = sgtd_apply(x_m, b.mask);
    for (int i = 0; i < lo.depth; ++i) {
        h = sgtd_apply(h, b.mask);
        h = encoder_block_forward(h, w.blocks[i], lo.heads);
        h = sscp_fuse(h, b.spectral_tokens, w.prompts[i]);
    }
    EXPECT_EQ(h, b.tokens);
}

TEST(Decode, ZeroTokensGiveHalfAndOneHotCornerFixture) {
    TokenTensor zero(1, 2, 2, 3);
    Linear head(3, 4);
    head.weight.assign(12, 0.7);
    for (double v : decode_mask(zero, head, 2).data) EXPECT_EQ(v, 0.5);

    TokenTensor t(1, 2, 2, 3);
    t.at(0, 0, 1) = 1.0;  // only the top-left token is active
    Linear onehot(3, 4);
    for (int k = 0; k < 4; ++k) onehot.w(k, 1) = 5.0;
    const SaliencyMap logits = decode_logits(t, onehot, 2);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) EXPECT_EQ(logits.at(y, x), (y < 2 && x < 2) ? 5.0 : 0.0);
}
