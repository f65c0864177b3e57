#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "gen.hpp"
#include "hcod/errors.hpp"
#include "hcod/hsicube.hpp"
#include "reference.hpp"
#include "tmpdir.hpp"

using namespace hcod;
namespace fs = std::filesystem;

namespace {

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Raw HSIC bytes with an arbitrary header, for malformed-file fixtures.
std::string hsic_bytes(uint32_t h, uint32_t w, uint32_t c, const std::vector<float>& wl, size_t payload_floats,
                       uint32_t version = 1) {
    std::string out = "HSIC";
    put_u32(out, version);
    put_u32(out, h);
    put_u32(out, w);
    put_u32(out, c);
    for (float x : wl) put_u32(out, std::bit_cast<uint32_t>(x));
    for (size_t i = 0; i < payload_floats; ++i) put_u32(out, std::bit_cast<uint32_t>(0.25f));
    return out;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream(p, std::ios::binary) << bytes;
}

}  // namespace

TEST(HsiCubeIo, RoundTripRandom16x16x8IsBitExact) {
    const auto dir = test::scratch_dir();
    test::Gen g(11);
    const HsiCube cube = g.cube(16, 16, 8);
    save_cube(cube, dir / "c.hsic");
    const HsiCube back = load_cube(dir / "c.hsic");
    EXPECT_EQ(back, cube);
    EXPECT_EQ(std::memcmp(back.data.data(), cube.data.data(), cube.data.size() * sizeof(float)), 0);
}

TEST(HsiCubeIo, RoundTripPropertyOverRandomShapes) {
    const auto dir = test::scratch_dir();
    test::Gen g(12);
    for (int trial = 0; trial < 40; ++trial) {
        HsiCube cube = g.cube(g.range(8, 24), g.range(8, 24), g.range(4, 12), 0.0f, 3.0f);
        // Include exact zeros and subnormal-free extremes.
        cube.data[0] = 0.0f;
        cube.data[1] = std::numeric_limits<float>::max();
        const auto path = dir / ("c" + std::to_string(trial) + ".hsic");
        save_cube(cube, path);
        ASSERT_EQ(load_cube(path), cube) << "trial " << trial;
    }
}

TEST(HsiCubeIo, ZeroCube8x8x4HasFormatSize) {
    const auto dir = test::scratch_dir();
    HsiCube cube(8, 8, 4, {400, 500, 600, 700});
    save_cube(cube, dir / "z.hsic");
    // magic + version + H,W,C + 4 wavelengths + payload.
    const uintmax_t expected = 4 + 4 + 3 * 4 + 4 * 4 + 8 * 8 * 4 * 4;
    EXPECT_EQ(fs::file_size(dir / "z.hsic"), expected);
    EXPECT_EQ(expected, 1060u);
}

TEST(HsiCubeIo, LittleEndianHeaderLayout) {
    const auto dir = test::scratch_dir();
    HsiCube cube(8, 9, 4, {400, 500, 600, 700});
    save_cube(cube, dir / "h.hsic");
    const std::string b = test::slurp(dir / "h.hsic");
    EXPECT_EQ(b.substr(0, 4), "HSIC");
    EXPECT_EQ(static_cast<unsigned char>(b[4]), 1);
    EXPECT_EQ(static_cast<unsigned char>(b[8]), 8);
    EXPECT_EQ(static_cast<unsigned char>(b[12]), 9);
    EXPECT_EQ(static_cast<unsigned char>(b[16]), 4);
    float wl0;
    std::memcpy(&wl0, b.data() + 20, 4);
    EXPECT_EQ(wl0, 400.0f);
}

TEST(HsiCubeIo, DecreasingWavelengthsAreValidationError) {
    const auto dir = test::scratch_dir();
    write_bytes(dir / "w.hsic", hsic_bytes(8, 8, 4, {500, 400, 600, 700}, 8 * 8 * 4));
    EXPECT_THROW(load_cube(dir / "w.hsic"), ValidationError);
    HsiCube cube(8, 8, 4, {500, 400, 600, 700});
    EXPECT_THROW(save_cube(cube, dir / "x.hsic"), ValidationError);
}

TEST(HsiCubeIo, TruncatedPayloadIsFormatError) {
    const auto dir = test::scratch_dir();
    std::vector<float> wl(200);
    for (int i = 0; i < 200; ++i) wl[i] = 400.0f + i;
    write_bytes(dir / "t.hsic", hsic_bytes(8, 8, 200, wl, 8 * 8 * 100));
    EXPECT_THROW(load_cube(dir / "t.hsic"), FormatError);
}

TEST(HsiCubeIo, BadMagicAndVersionAreFormatErrors) {
    const auto dir = test::scratch_dir();
    std::string bytes = hsic_bytes(8, 8, 4, {400, 500, 600, 700}, 256);
    bytes[0] = 'X';
    write_bytes(dir / "m.hsic", bytes);
    EXPECT_THROW(load_cube(dir / "m.hsic"), FormatError);
    write_bytes(dir / "v.hsic", hsic_bytes(8, 8, 4, {400, 500, 600, 700}, 256, 2));
    EXPECT_THROW(load_cube(dir / "v.hsic"), FormatError);
    write_bytes(dir / "s.hsic", "HSI");
    EXPECT_THROW(load_cube(dir / "s.hsic"), FormatError);
}

TEST(HsiCubeIo, NanPayloadIsValidationError) {
    const auto dir = test::scratch_dir();
    test::Gen g(3);
    HsiCube cube = g.cube(8, 8, 4);
    save_cube(cube, dir / "n.hsic");
    std::string b = test::slurp(dir / "n.hsic");
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(b.data() + 20 + 16 + 4 * 7, &nan, 4);
    write_bytes(dir / "n.hsic", b);
    EXPECT_THROW(load_cube(dir / "n.hsic"), ValidationError);
}

TEST(HsiCubeIo, NegativeReflectanceAndSmallCubesRejected) {
    test::Gen g(4);
    HsiCube cube = g.cube(8, 8, 4);
    cube.data[5] = -0.1f;
    EXPECT_THROW(validate_cube(cube), ValidationError);
    EXPECT_THROW(validate_cube(g.cube(7, 8, 4)), ValidationError);
    EXPECT_THROW(validate_cube(g.cube(8, 8, 3)), ValidationError);
    EXPECT_NO_THROW(validate_cube(g.cube(2, 2, 3), false));
}

TEST(HsiCubeIo, MissingFileAndUnwritableDirectoryAreIoErrors) {
    const auto dir = test::scratch_dir();
    EXPECT_THROW(load_cube(dir / "absent.hsic"), IoError);
    HsiCube cube(8, 8, 4, {400, 500, 600, 700});
    EXPECT_THROW(save_cube(cube, dir / "no_such_dir" / "c.hsic"), IoError);
}

TEST(BandSubsample, TwoHundredToThirtyThreeMatchesRoundingRule) {
    const auto idx = uniform_band_indices(200, 33);
    ASSERT_EQ(idx.size(), 33u);
    EXPECT_EQ(idx.front(), 0);
    EXPECT_EQ(idx[1], 6);
    EXPECT_EQ(idx[2], 12);
    EXPECT_EQ(idx.back(), 199);
    for (int i = 0; i < 33; ++i) {
        EXPECT_EQ(idx[i], ref::band_index(200, 33, i)) << i;
    }
}

TEST(BandSubsample, IndexFormulaMatchesOracleForAllSmallShapes) {
    for (int c = 1; c <= 64; ++c) {
        for (int n = 1; n <= c; ++n) {
            const auto idx = uniform_band_indices(c, n);
            for (int i = 0; i < n; ++i) {
                ASSERT_EQ(idx[i], ref::band_index(c, n, i)) << "C=" << c << " n=" << n << " i=" << i;
            }
        }
    }
}

TEST(BandSubsample, FiveToTwoPicksEndpoints) {
    EXPECT_EQ(uniform_band_indices(5, 2), (std::vector<int>{0, 4}));
    EXPECT_EQ(uniform_band_indices(5, 1), (std::vector<int>{0}));
}

TEST(BandSubsample, FullCountIsIdentity) {
    test::Gen g(5);
    const HsiCube cube = g.cube(8, 8, 12);
    EXPECT_EQ(band_subsample(cube, 12), cube);
}

TEST(BandSubsample, TooManyBandsIsValidationError) {
    test::Gen g(6);
    const HsiCube cube = g.cube(8, 8, 6);
    EXPECT_THROW(band_subsample(cube, 7), ValidationError);
    EXPECT_THROW(band_subsample(cube, 0), ValidationError);
}

TEST(BandSubsample, PreservesRangeMonotonicityAndComposes) {
    test::Gen g(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int c = g.range(4, 40);
        const int n = g.range(1, c);
        const HsiCube cube = g.cube(8, 8, c);
        const HsiCube sub = band_subsample(cube, n);
        EXPECT_EQ(band_subsample(band_subsample(cube, c), n), sub);
        for (int i = 1; i < n; ++i) {
            EXPECT_LT(sub.wavelengths_nm[i - 1], sub.wavelengths_nm[i]);
        }
        const auto [lo, hi] = std::minmax_element(cube.data.begin(), cube.data.end());
        for (float v : sub.data) {
            EXPECT_GE(v, *lo);
            EXPECT_LE(v, *hi);
        }
        const auto idx = uniform_band_indices(c, n);
        for (int i = 0; i < n; ++i) {
            EXPECT_EQ(sub.at(3, 5, i), cube.at(3, 5, idx[i]));
        }
    }
}
