#include <gtest/gtest.h>

#include <cmath>

#include "hcod/errors.hpp"
#include "hcod/hsicube.hpp"
#include "hcod/ssdm.hpp"
#include "hcod/synth.hpp"
#include "reference.hpp"
#include "tmpdir.hpp"

using namespace hcod;

namespace {

SyntheticSceneSpec base_spec(uint64_t seed) {
    SyntheticSceneSpec s;
    s.seed = seed;
    return s;
}

std::vector<double> region_mean_spectrum(const SyntheticScene& sc, bool foreground) {
    std::vector<double> acc(static_cast<size_t>(sc.cube.bands), 0.0);
    size_t n = 0;
    for (int r = 0; r < sc.cube.height; ++r) {
        for (int c = 0; c < sc.cube.width; ++c) {
            if ((sc.mask.at(r, c) != 0) != foreground) continue;
            const auto s = sc.cube.spectrum(r, c);
            for (size_t b = 0; b < acc.size(); ++b) acc[b] += s[b];
            ++n;
        }
    }
    for (auto& v : acc) v /= static_cast<double>(n);
    return acc;
}

}  // namespace

TEST(Synth, DefaultSceneHasExactForegroundCount) {
    const auto sc = generate_scene(base_spec(7));
    EXPECT_EQ(sc.cube.height, 64);
    EXPECT_EQ(sc.cube.width, 64);
    EXPECT_EQ(sc.cube.bands, 20);
    EXPECT_EQ(sc.mask.count(), static_cast<size_t>(std::llround(0.05 * 64 * 64)));
    EXPECT_NO_THROW(validate_cube(sc.cube));
    EXPECT_NO_THROW(sc.mask.validate());
}

TEST(Synth, AreaIsExactForEveryShapeAndRatio) {
    for (auto shape : {ObjectShape::Ellipse, ObjectShape::Blob, ObjectShape::Fragmented}) {
        for (double ratio : {0.003, 0.02, 0.05, 0.2, 0.5}) {
            for (uint64_t seed = 0; seed < 4; ++seed) {
                auto spec = base_spec(seed);
                spec.object_shape = shape;
                spec.object_area_ratio = ratio;
                const auto sc = generate_scene(spec);
                ASSERT_EQ(sc.mask.count(), static_cast<size_t>(std::llround(ratio * 4096)))
                    << to_string(shape) << " ratio " << ratio << " seed " << seed;
            }
        }
    }
}

TEST(Synth, DeterministicForFixedSpec) {
    const auto dir = test::scratch_dir();
    auto spec = base_spec(42);
    spec.object_shape = ObjectShape::Blob;
    spec.rgb_matched = true;
    const auto a = generate_scene(spec);
    const auto b = generate_scene(spec);
    EXPECT_EQ(a.cube, b.cube);
    EXPECT_EQ(a.mask, b.mask);
    save_cube(a.cube, dir / "a.hsic");
    save_cube(b.cube, dir / "b.hsic");
    EXPECT_EQ(test::slurp(dir / "a.hsic"), test::slurp(dir / "b.hsic"));
}

TEST(Synth, SeedsProduceDifferentScenes) {
    const auto a = generate_scene(base_spec(1));
    const auto b = generate_scene(base_spec(2));
    EXPECT_NE(a.cube, b.cube);
}

TEST(Synth, WavelengthsSpanRequestedRange) {
    auto spec = base_spec(3);
    spec.bands = 11;
    spec.wavelength_min_nm = 450;
    spec.wavelength_max_nm = 950;
    const auto sc = generate_scene(spec);
    ASSERT_EQ(sc.cube.wavelengths_nm.size(), 11u);
    EXPECT_FLOAT_EQ(sc.cube.wavelengths_nm.front(), 450.0f);
    EXPECT_FLOAT_EQ(sc.cube.wavelengths_nm.back(), 950.0f);
    EXPECT_FLOAT_EQ(sc.cube.wavelengths_nm[1], 500.0f);
}

TEST(Synth, MetamerPairSharesTristimulusButNotSpectrum) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        auto spec = base_spec(seed);
        spec.rgb_matched = true;
        const auto sc = generate_scene(spec);
        std::vector<float> bg(sc.background_spectrum.begin(), sc.background_spectrum.end());
        std::vector<float> obj(sc.object_spectrum.begin(), sc.object_spectrum.end());
        const auto xb = ref::tristimulus(bg, sc.cube.wavelengths_nm, kDefaultXyzBands);
        const auto xo = ref::tristimulus(obj, sc.cube.wavelengths_nm, kDefaultXyzBands);
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(xb[j], xo[j], 1e-6) << "seed " << seed << " channel " << j;
        }
        EXPECT_GT(ref::spectral_angle(sc.background_spectrum, sc.object_spectrum), 0.05) << "seed " << seed;

        // Region means of the stored cube keep the match up to float storage.
        const auto fg = region_mean_spectrum(sc, true);
        const auto bgm = region_mean_spectrum(sc, false);
        const auto raw = map_to_ciexyz(sc.cube).raw;
        double fx[3] = {0, 0, 0}, bx[3] = {0, 0, 0};
        for (int r = 0; r < 64; ++r) {
            for (int c = 0; c < 64; ++c) {
                for (int j = 0; j < 3; ++j) {
                    (sc.mask.at(r, c) ? fx : bx)[j] += raw.at(r, c, j);
                }
            }
        }
        const double nf = static_cast<double>(sc.mask.count());
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(fx[j] / nf, bx[j] / (4096 - nf), 1e-6) << "seed " << seed;
        }
        EXPECT_GT(ref::spectral_angle(fg, bgm), 0.05);
    }
}

TEST(Synth, ObjectDiffersFromBackgroundWithoutMatching) {
    const auto sc = generate_scene(base_spec(5));
    EXPECT_GT(ref::spectral_angle(sc.background_spectrum, sc.object_spectrum), 0.0);
    for (double v : sc.object_spectrum) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Synth, RejectsImpossibleRequests) {
    auto spec = base_spec(1);
    spec.object_area_ratio = 0.0;
    EXPECT_THROW(generate_scene(spec), SpecError);
    spec.object_area_ratio = 1.0;
    EXPECT_THROW(generate_scene(spec), SpecError);
    spec.object_area_ratio = 1e-6;
    EXPECT_THROW(generate_scene(spec), SpecError);

    spec = base_spec(1);
    spec.height = 7;
    EXPECT_THROW(generate_scene(spec), SpecError);
    spec = base_spec(1);
    spec.bands = 3;
    EXPECT_THROW(generate_scene(spec), SpecError);
    spec = base_spec(1);
    spec.wavelength_max_nm = spec.wavelength_min_nm;
    EXPECT_THROW(generate_scene(spec), SpecError);
    spec = base_spec(1);
    spec.spectral_contrast = -0.1;
    EXPECT_THROW(generate_scene(spec), SpecError);
}

TEST(Synth, WeakMetamerIsRejected) {
    auto spec = base_spec(1);
    spec.rgb_matched = true;
    spec.spectral_contrast = 1e-4;
    EXPECT_THROW(generate_scene(spec), SpecError);
}

TEST(Synth, ShapeNamesRoundTrip) {
    for (auto shape : {ObjectShape::Ellipse, ObjectShape::Blob, ObjectShape::Fragmented}) {
        EXPECT_EQ(parse_object_shape(to_string(shape)), shape);
    }
    EXPECT_THROW(parse_object_shape("square"), SpecError);
}
