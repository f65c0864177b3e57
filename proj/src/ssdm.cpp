#include "hcod/ssdm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hcod/errors.hpp"

namespace hcod {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

// Angle between two spectra via the half-angle form 2*atan2(|a^-b^|, |a^+b^|).
// Identical to arccos of the clamped cosine in exact arithmetic, but keeps full
// precision near 0 and pi where arccos loses ~sqrt(eps).
double angle_between(std::span<const double> a, std::span<const double> b, double na, double nb) {
    double diff = 0.0;
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double x = a[i] / na;
        const double y = b[i] / nb;
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

// Degenerate spectra carry no material evidence and score 0.
double sad_or_zero(std::span<const double> a, std::span<const double> b) {
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na <= kSpectrumNormEps || nb <= kSpectrumNormEps) {
        return 0.0;
    }
    return angle_between(a, b, na, nb);
}

// Binomial taps applied as (a+e) + 4(b+d) + 6c, then /16.
inline double binomial5(double a, double b, double c, double d, double e) {
    return ((a + e) + 4.0 * (b + d) + 6.0 * c) / 16.0;
}

void normalize_min_max(Image& img, int ch) {
    double lo = img.at(0, 0, ch);
    double hi = lo;
    for (size_t p = 0; p < img.pixels(); ++p) {
        const double v = img.data[p * img.channels + ch];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    for (size_t p = 0; p < img.pixels(); ++p) {
        double& v = img.data[p * img.channels + ch];
        v = range <= 1e-12 ? 0.0 : (v - lo) / range;
    }
}

int ceil_div_pow2(int n, int level) { return static_cast<int>((static_cast<int64_t>(n) + (int64_t{1} << level) - 1) >> level); }

}  // namespace

std::vector<Tristimulus> xyz_band_weights(std::span<const float> wavelengths_nm, const CmfTable& cmf,
                                          int n_bands) {
    const int bands = static_cast<int>(wavelengths_nm.size());
    if (n_bands < 1) {
        throw ValidationError("map_to_ciexyz: n_bands must be positive");
    }
    const auto idx = uniform_band_indices(bands, std::min(n_bands, bands));
    std::vector<Tristimulus> w(static_cast<size_t>(bands), Tristimulus{0.0, 0.0, 0.0});
    for (int b : idx) {
        w[static_cast<size_t>(b)] = cmf.at(wavelengths_nm[static_cast<size_t>(b)]);
    }
    return w;
}

XyzImage map_to_ciexyz(const HsiCube& cube, const CmfTable& cmf, int n_bands) {
    validate_cube(cube, false);
    cmf.validate();
    if (n_bands < 1) {
        throw ValidationError("map_to_ciexyz: n_bands must be positive");
    }

    XyzImage out;
    out.band_indices = uniform_band_indices(cube.bands, std::min(n_bands, cube.bands));
    std::vector<Tristimulus> w;
    w.reserve(out.band_indices.size());
    bool overlap = false;
    for (int b : out.band_indices) {
        w.push_back(cmf.at(cube.wavelengths_nm[static_cast<size_t>(b)]));
        overlap = overlap || w.back()[0] > 0.0 || w.back()[1] > 0.0 || w.back()[2] > 0.0;
    }
    if (!overlap) {
        throw ValidationError("map_to_ciexyz: cube wavelengths do not overlap the colour matching functions");
    }

    out.raw = Image(cube.height, cube.width, 3);
    double peak = 0.0;
    for (size_t p = 0; p < cube.pixels(); ++p) {
        const float* spec = cube.data.data() + p * cube.bands;
        for (int t = 0; t < 3; ++t) {
            double s = 0.0;
            for (size_t i = 0; i < out.band_indices.size(); ++i) {
                s += static_cast<double>(spec[out.band_indices[i]]) * w[i][t];
            }
            out.raw.data[p * 3 + t] = s;
            peak = std::max(peak, s);
        }
    }
    out.scale = peak > 0.0 ? peak : 1.0;
    out.normalized = out.raw;
    for (double& v : out.normalized.data) {
        v /= out.scale;
    }
    return out;
}

double sad(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("sad: spectra differ in length");
    }
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na <= kSpectrumNormEps || nb <= kSpectrumNormEps) {
        throw DegenerateSpectrum("sad: zero-norm spectrum");
    }
    return angle_between(a, b, na, nb);
}

void PyramidConfig::validate() const {
    if (used_levels.empty() || level_gap < 1) {
        throw ValidationError("pyramid: need at least one centre level and a positive gap");
    }
    for (int c : used_levels) {
        if (c < 0 || c + level_gap > levels) {
            throw ValidationError("pyramid: level " + std::to_string(c) + "+" + std::to_string(level_gap) +
                                  " exceeds pyramid depth " + std::to_string(levels));
        }
    }
}

Image pyramid_down(const Image& level) {
    const int h = level.height;
    const int w = level.width;
    const int ch = level.channels;
    const int oh = (h + 1) / 2;
    const int ow = (w + 1) / 2;
    auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };

    Image horiz(h, ow, ch);
    for (int r = 0; r < h; ++r) {
        for (int oc = 0; oc < ow; ++oc) {
            const int c = 2 * oc;
            const double* p0 = &level.data[level.index(r, clampi(c - 2, w))];
            const double* p1 = &level.data[level.index(r, clampi(c - 1, w))];
            const double* p2 = &level.data[level.index(r, c)];
            const double* p3 = &level.data[level.index(r, clampi(c + 1, w))];
            const double* p4 = &level.data[level.index(r, clampi(c + 2, w))];
            double* dst = &horiz.data[horiz.index(r, oc)];
            for (int k = 0; k < ch; ++k) {
                dst[k] = binomial5(p0[k], p1[k], p2[k], p3[k], p4[k]);
            }
        }
    }

    Image out(oh, ow, ch);
    for (int orow = 0; orow < oh; ++orow) {
        const int r = 2 * orow;
        for (int oc = 0; oc < ow; ++oc) {
            const double* p0 = &horiz.data[horiz.index(clampi(r - 2, h), oc)];
            const double* p1 = &horiz.data[horiz.index(clampi(r - 1, h), oc)];
            const double* p2 = &horiz.data[horiz.index(r, oc)];
            const double* p3 = &horiz.data[horiz.index(clampi(r + 1, h), oc)];
            const double* p4 = &horiz.data[horiz.index(clampi(r + 2, h), oc)];
            double* dst = &out.data[out.index(orow, oc)];
            for (int k = 0; k < ch; ++k) {
                dst[k] = binomial5(p0[k], p1[k], p2[k], p3[k], p4[k]);
            }
        }
    }
    return out;
}

std::vector<Image> gaussian_pyramid(const HsiCube& cube, int levels) {
    std::vector<Image> pyr;
    pyr.reserve(static_cast<size_t>(levels) + 1);
    Image base(cube.height, cube.width, cube.bands);
    std::transform(cube.data.begin(), cube.data.end(), base.data.begin(),
                   [](float v) { return static_cast<double>(v); });
    pyr.push_back(std::move(base));
    for (int l = 1; l <= levels; ++l) {
        pyr.push_back(pyramid_down(pyr.back()));
    }
    return pyr;
}

Image resize_bilinear(const Image& src, int height, int width) {
    Image out(height, width, src.channels);
    const double sy = static_cast<double>(src.height) / height;
    const double sx = static_cast<double>(src.width) / width;
    auto coord = [](int dst, double scale, int n, int& i0, int& i1, double& t) {
        const double s = std::clamp((dst + 0.5) * scale - 0.5, 0.0, static_cast<double>(n - 1));
        i0 = static_cast<int>(std::floor(s));
        i1 = std::min(i0 + 1, n - 1);
        t = s - i0;
    };
    for (int r = 0; r < height; ++r) {
        int y0, y1;
        double ty;
        coord(r, sy, src.height, y0, y1, ty);
        for (int c = 0; c < width; ++c) {
            int x0, x1;
            double tx;
            coord(c, sx, src.width, x0, x1, tx);
            const double* a = &src.data[src.index(y0, x0)];
            const double* b = &src.data[src.index(y0, x1)];
            const double* d = &src.data[src.index(y1, x0)];
            const double* e = &src.data[src.index(y1, x1)];
            double* dst = &out.data[out.index(r, c)];
            for (int k = 0; k < src.channels; ++k) {
                const double top = a[k] + tx * (b[k] - a[k]);
                const double bottom = d[k] + tx * (e[k] - d[k]);
                dst[k] = top + ty * (bottom - top);
            }
        }
    }
    return out;
}

SaliencyMap spectral_saliency(const HsiCube& cube, const PyramidConfig& cfg) {
    validate_cube(cube);
    cfg.validate();
    for (int c : cfg.used_levels) {
        if (ceil_div_pow2(cube.height, c) < 2 || ceil_div_pow2(cube.width, c) < 2) {
            throw ValidationError("spectral_saliency: " + std::to_string(cube.height) + "x" +
                                  std::to_string(cube.width) + " cube collapses below 2x2 at level " +
                                  std::to_string(c));
        }
    }

    const auto pyr = gaussian_pyramid(cube, cfg.levels);
    const int n_out = static_cast<int>(cfg.used_levels.size());
    SaliencyMap out(cube.height, cube.width, n_out);

    for (int k = 0; k < n_out; ++k) {
        const int c = cfg.used_levels[static_cast<size_t>(k)];
        const Image& centre = pyr[static_cast<size_t>(c)];
        const Image surround = resize_bilinear(pyr[static_cast<size_t>(c + cfg.level_gap)], centre.height,
                                               centre.width);
        Image sal(centre.height, centre.width, 1);
        const auto bands = static_cast<size_t>(cube.bands);
        for (size_t p = 0; p < centre.pixels(); ++p) {
            sal.data[p] = sad_or_zero({centre.data.data() + p * bands, bands},
                                      {surround.data.data() + p * bands, bands});
        }
        const Image full = resize_bilinear(sal, cube.height, cube.width);
        for (size_t p = 0; p < full.pixels(); ++p) {
            out.data[p * n_out + k] = full.data[p];
        }
        normalize_min_max(out, k);
    }
    return out;
}

}  // namespace hcod
