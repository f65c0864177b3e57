#pragma once

#include <span>
#include <vector>

#include "hcod/cmf.hpp"
#include "hcod/hsicube.hpp"
#include "hcod/image.hpp"

namespace hcod {

inline constexpr int kDefaultXyzBands = 33;

// Tristimulus image. `normalized` is `raw / scale` with scale = max(raw)
// (scale = 1 for an all-black input); `raw` keeps the unscaled band sums.
struct XyzImage {
    Image normalized;
    Image raw;
    double scale = 1.0;
    std::vector<int> band_indices;  // bands of the source cube that were summed
};

// Per-band CMF weights actually applied by map_to_ciexyz: the CMF interpolated
// at each of the min(n_bands, C) uniformly selected bands, zero elsewhere.
std::vector<Tristimulus> xyz_band_weights(std::span<const float> wavelengths_nm, const CmfTable& cmf,
                                          int n_bands = kDefaultXyzBands);

XyzImage map_to_ciexyz(const HsiCube& cube, const CmfTable& cmf = cie1931_2deg(),
                       int n_bands = kDefaultXyzBands);

inline constexpr double kSpectrumNormEps = 1e-12;

// Spectral angle in [0, pi]. Throws DegenerateSpectrum when either vector has
// norm <= 1e-12 and ValidationError on a length mismatch.
double sad(std::span<const double> a, std::span<const double> b);

struct PyramidConfig {
    int levels = 7;                       // decimated levels above the base (level 0 = input)
    int level_gap = 3;                    // surround level = centre level + gap
    std::vector<int> used_levels{2, 3, 4};

    void validate() const;
};

// One 5-tap binomial blur ([1 4 6 4 1]/16, edge replication) followed by
// even-index decimation. Output is ceil(H/2) x ceil(W/2), all channels.
Image pyramid_down(const Image& level);

// Levels 0..cfg.levels; level l is ceil(H/2^l) x ceil(W/2^l) x C.
std::vector<Image> gaussian_pyramid(const HsiCube& cube, int levels);

// Half-pixel-centred bilinear resampling. Interpolates as a + t*(b - a), so
// constant inputs stay bit-exact.
Image resize_bilinear(const Image& src, int height, int width);

// Three-channel spectral prompt, channel k for centre level used_levels[k];
// each channel min-max normalized to [0,1] (flat channel -> zeros).
SaliencyMap spectral_saliency(const HsiCube& cube, const PyramidConfig& cfg = {});

}  // namespace hcod
