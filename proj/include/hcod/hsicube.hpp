#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hcod {

// Hyperspectral reflectance cube, band-interleaved-by-pixel:
//   data[(row * width + col) * bands + band]
// so a pixel's spectrum is contiguous.
struct HsiCube {
    int height = 0;
    int width = 0;
    int bands = 0;
    std::vector<float> wavelengths_nm;
    std::vector<float> data;

    HsiCube() = default;
    HsiCube(int h, int w, int c, std::vector<float> wavelengths)
        : height(h),
          width(w),
          bands(c),
          wavelengths_nm(std::move(wavelengths)),
          data(static_cast<size_t>(h) * w * c, 0.0f) {}

    size_t pixels() const { return static_cast<size_t>(height) * width; }
    size_t index(int r, int c, int b) const {
        return (static_cast<size_t>(r) * width + c) * bands + b;
    }
    float& at(int r, int c, int b) { return data[index(r, c, b)]; }
    float at(int r, int c, int b) const { return data[index(r, c, b)]; }

    std::span<const float> spectrum(int r, int c) const {
        return {data.data() + index(r, c, 0), static_cast<size_t>(bands)};
    }
    std::span<float> spectrum(int r, int c) {
        return {data.data() + index(r, c, 0), static_cast<size_t>(bands)};
    }

    bool operator==(const HsiCube&) const = default;
};

inline constexpr int kMinCubeExtent = 8;
inline constexpr int kMinCubeBands = 4;

// Checks shape/payload agreement, strictly increasing wavelengths, finite and
// nonnegative reflectance. With require_min_extent the H,W >= 8 and C >= 4
// lower bounds are enforced as well. Throws ValidationError.
void validate_cube(const HsiCube& cube, bool require_min_extent = true);

// HSIC container: "HSIC" | u32 version | u32 H | u32 W | u32 C |
// C x f32 wavelengths | H*W*C x f32 BIP payload. All little-endian.
inline constexpr uint32_t kHsicVersion = 1;

// Both directions enforce validate_cube with the minimum extent, so every
// saved file loads back bit-exactly. Load errors: FormatError for a bad
// header or size, ValidationError for invalid content, IoError if unreadable.
HsiCube load_cube(const std::filesystem::path& path);
void save_cube(const HsiCube& cube, const std::filesystem::path& path);

// Endpoint-inclusive uniform band selection: round(i * (C-1) / (n-1)).
std::vector<int> uniform_band_indices(int bands, int n);
HsiCube band_subsample(const HsiCube& cube, int n);

}  // namespace hcod
