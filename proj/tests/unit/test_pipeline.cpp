#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "hcod/errors.hpp"
#include "hcod/io.hpp"
#include "hcod/losses.hpp"
#include "hcod/pipeline.hpp"
#include "hcod/synth.hpp"
#include "tmpdir.hpp"

using namespace hcod;

namespace {

SegmentConfig small_config() {
    SegmentConfig cfg;
    cfg.encoder.patch_size = 4;
    cfg.encoder.depth = 2;
    cfg.encoder.channels = 8;
    cfg.encoder.heads = 2;
    cfg.encoder.seed = 3;
    return cfg;
}

SyntheticScene small_scene(uint64_t seed) {
    SyntheticSceneSpec spec;
    spec.seed = seed;
    spec.height = 32;
    spec.width = 32;
    spec.bands = 10;
    spec.object_area_ratio = 0.15;
    spec.spectral_contrast = 0.5;
    return generate_scene(spec);
}

}  // namespace

TEST(Pipeline, DecomposeProducesBothBranches) {
    const auto sc = small_scene(1);
    const Decomposition d = decompose(sc.cube, small_config());
    EXPECT_EQ(d.xyz.normalized.channels, 3);
    EXPECT_EQ(d.saliency.channels, 3);
    EXPECT_EQ(d.saliency.height, 32);
    double peak = 0;
    for (double v : d.xyz.normalized.data) peak = std::max(peak, v);
    EXPECT_DOUBLE_EQ(peak, 1.0);
}

TEST(Pipeline, SegmentIsDeterministicAndInOpenUnitInterval) {
    const auto sc = small_scene(2);
    const SegmentConfig cfg = small_config();
    const Model model = init_model(cfg);
    const SegmentResult a = segment(sc.cube, cfg, model);
    const SegmentResult b = segment(sc.cube, cfg, init_model(cfg));
    EXPECT_EQ(a.s_f.data, b.s_f.data);
    EXPECT_EQ(a.s_f.height, 32);
    EXPECT_EQ(a.s_f.width, 32);
    for (double v : a.s_f.data) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
    EXPECT_FALSE(a.s_d.has_value());
    EXPECT_EQ(a.kept_fraction, a.mask.kept_fraction());
}

TEST(Pipeline, DisabledDetailPathReturnsFinalMapUnchanged) {
    const auto sc = small_scene(3);
    SegmentConfig off = small_config();
    SegmentConfig on = off;
    on.fde_enabled = true;
    Model model = init_model(on);
    test::Gen g(121);
    model.fde.proj = g.vec(model.fde.proj.size(), -0.5, 0.5);
    const SegmentResult a = segment(sc.cube, off, model);
    const SegmentResult b = segment(sc.cube, on, model);
    EXPECT_EQ(a.s_f.data, b.s_f.data);
    ASSERT_TRUE(b.s_d.has_value());
    EXPECT_NE(b.s_d->data, b.s_f.data);
    for (double v : b.s_d->data) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Pipeline, ZeroTauKeepsEveryToken) {
    const auto sc = small_scene(4);
    SegmentConfig cfg = small_config();
    cfg.encoder.sgtd_tau = 0.0;
    EXPECT_EQ(segment(sc.cube, cfg, init_model(cfg)).kept_fraction, 1.0);
    cfg.encoder.sgtd_tau = 1.0;
    EXPECT_LT(segment(sc.cube, cfg, init_model(cfg)).kept_fraction, 1.0);
}

TEST(Pipeline, ModelWeightsRoundTrip) {
    const auto dir = test::scratch_dir();
    const auto sc = small_scene(5);
    const SegmentConfig cfg = small_config();
    Model a = init_model(cfg);
    test::Gen g(122);
    for (auto& p : trainable_parameters(a, cfg)) {
        for (double& v : *p.values) v = static_cast<float>(g.uniform(-0.3, 0.3));
    }
    save_weights(a.parameters(), dir / "w.bin", dir / "w.json");
    SegmentConfig other = cfg;
    other.encoder.seed = 99;
    Model b = init_model(other);
    load_weights(b.parameters(), dir / "w.bin", dir / "w.json");
    // Every initial value is float-rounded on save; compare after the same rounding.
    Model a_rounded = a;
    for (auto& p : a_rounded.parameters()) {
        for (double& v : *p.values) v = static_cast<float>(v);
    }
    EXPECT_EQ(segment(sc.cube, cfg, b).s_f.data, segment(sc.cube, cfg, a_rounded).s_f.data);
}

TEST(HeadTraining, CachedLossMatchesFullForward) {
    const auto sc = small_scene(6);
    SegmentConfig cfg = small_config();
    cfg.fde_enabled = true;
    Model model = init_model(cfg);
    test::Gen g(123);
    model.fde.proj = g.vec(model.fde.proj.size(), -0.3, 0.3);
    for (auto& p : trainable_parameters(model, cfg)) {
        for (double& v : *p.values) v += g.uniform(-0.2, 0.2);
    }
    const Decomposition d = decompose(sc.cube, cfg);
    const HeadCache cache = make_head_cache(d, sc.mask, cfg, model);
    const SegmentResult r = segment(d, cfg, model);
    const double want = total_loss(*r.s_d, r.s_f, sc.mask).total;
    EXPECT_NEAR(head_loss(model, cfg, cache), want, 1e-12);
}

TEST(HeadTraining, GradientMatchesFiniteDifferences) {
    const auto sc = small_scene(7);
    SegmentConfig cfg = small_config();
    Model model = init_model(cfg);
    test::Gen g(124);
    model.fde.proj = g.vec(model.fde.proj.size(), -0.2, 0.2);
    for (auto& p : trainable_parameters(model, cfg)) {
        for (double& v : *p.values) v += g.uniform(-0.3, 0.3);
    }
    const HeadCache cache = make_head_cache(decompose(sc.cube, cfg), sc.mask, cfg, model);
    ASSERT_TRUE(cache.has_final_prompt);
    std::vector<std::vector<double>> grads;
    head_loss(model, cfg, cache, &grads);
    auto params = trainable_parameters(model, cfg);
    ASSERT_EQ(grads.size(), params.size());
    ASSERT_EQ(params.size(), 6u);
    const double h = 1e-6;
    int checked = 0;
    for (size_t k = 0; k < params.size(); ++k) {
        auto& vals = *params[k].values;
        ASSERT_EQ(grads[k].size(), vals.size());
        for (int trial = 0; trial < 8; ++trial) {
            const size_t i = static_cast<size_t>(g.range(0, static_cast<int>(vals.size()) - 1));
            const double x = vals[i];
            vals[i] = x + h;
            const double up = head_loss(model, cfg, cache);
            vals[i] = x - h;
            const double down = head_loss(model, cfg, cache);
            vals[i] = x;
            const double numeric = (up - down) / (2 * h);
            EXPECT_NEAR(grads[k][i], numeric, 1e-6 + 1e-4 * std::fabs(numeric)) << params[k].name << "[" << i << "]";
            ++checked;
        }
    }
    EXPECT_EQ(checked, 48);
}

TEST(HeadTraining, ParametersCoverDecodeAndFinalPrompt) {
    SegmentConfig cfg = small_config();
    Model model = init_model(cfg);
    const auto params = trainable_parameters(model, cfg);
    ASSERT_EQ(params.size(), 6u);
    EXPECT_EQ(params[0].name, "decode.weight");
    EXPECT_EQ(params[2].name, "prompts.1.fuse_in.weight");
    cfg.encoder.prompt_layers = {0};
    EXPECT_EQ(trainable_parameters(model, cfg).size(), 2u);
}

TEST(HeadTraining, GradientDescentLowersLoss) {
    const SegmentConfig cfg = small_config();
    Model model = init_model(cfg);
    std::vector<HeadCache> caches;
    for (uint64_t s = 0; s < 3; ++s) {
        const auto sc = small_scene(10 + s);
        caches.push_back(make_head_cache(decompose(sc.cube, cfg), sc.mask, cfg, model));
    }
    const auto history = train_head(model, cfg, caches, {30, 0.5});
    ASSERT_EQ(history.size(), 30u);
    EXPECT_LT(history.back(), history.front());
    EXPECT_THROW(train_head(model, cfg, {}, {}), ValidationError);
    EXPECT_THROW(train_head(model, cfg, caches, {10, 0.0}), ValidationError);
}

TEST(HeadTraining, GroundTruthShapeMismatch) {
    const auto sc = small_scene(8);
    const SegmentConfig cfg = small_config();
    const Model model = init_model(cfg);
    EXPECT_THROW(make_head_cache(decompose(sc.cube, cfg), Mask(16, 16), cfg, model), ValidationError);
}
