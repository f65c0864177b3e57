#include "hcod/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <utility>

#include "hcod/errors.hpp"
#include "hcod/rng.hpp"
#include "hcod/ssdm.hpp"

// Only +, -, *, / and sqrt are used on the generation path (all correctly
// rounded under IEEE 754), so scenes are reproducible across libm versions.

namespace hcod {

namespace {

enum Stream : uint64_t { kShape = 1, kSpectra = 2, kTexture = 3 };

struct Frame {
    double cy = 0.0;
    double cx = 0.0;
    double cos = 1.0;
    double sin = 0.0;
    double ax = 1.0;  // semi-axis along the rotated x direction
    double ay = 1.0;

    std::pair<double, double> local(double y, double x) const {
        const double dx = x - cx;
        const double dy = y - cy;
        return {(dx * cos + dy * sin) / ax, (-dx * sin + dy * cos) / ay};
    }
};

// Rotation with rational cosine/sine from a Pythagorean parametrisation.
void random_rotation(const CounterRng& rng, uint64_t counter, double& c, double& s) {
    const double a = 1.0 + static_cast<double>(rng.below(counter, 7));
    const double b = static_cast<double>(rng.below(counter + 1, 7)) * (rng.below(counter + 2, 2) ? 1.0 : -1.0);
    const double n = a * a + b * b;
    c = (a * a - b * b) / n;
    s = 2.0 * a * b / n;
}

double place(const CounterRng& rng, uint64_t counter, double margin, int extent) {
    const double half = 0.5 * extent;
    if (margin >= half) {
        return half - 0.5;
    }
    return rng.uniform(counter, margin - 0.5, extent - margin - 0.5);
}

// Per-pixel "distance" whose sublevel sets are the object shape; the object
// is the `target` pixels of smallest distance.
std::vector<double> shape_distance(const SyntheticSceneSpec& spec, const CounterRng& rng, size_t target) {
    const int h = spec.height;
    const int w = spec.width;
    std::vector<double> dist(static_cast<size_t>(h) * w);
    const double r_eq = std::sqrt(static_cast<double>(target) / 3.141592653589793);
    const double aspect = rng.uniform(0, 0.55, 1.0);

    if (spec.object_shape == ObjectShape::Fragmented) {
        const int k = 3 + static_cast<int>(rng.below(1, 3));
        // sin(pi/k) and the unit step e^{2 pi i / k} for k = 3, 4, 5.
        static constexpr std::array<double, 3> kSinPiK = {0.8660254037844386, 0.7071067811865476,
                                                          0.5877852522924731};
        static constexpr std::array<std::pair<double, double>, 3> kStep = {
            std::pair{-0.5, 0.8660254037844386}, std::pair{0.0, 1.0},
            std::pair{0.30901699437494745, 0.9510565162951535}};
        const double rho = r_eq / std::sqrt(static_cast<double>(k));
        const double ring = 1.35 * rho / kSinPiK[static_cast<size_t>(k - 3)];
        double c, s;
        random_rotation(rng, 2, c, s);
        const double margin = ring + 1.4 * rho + 1.0;
        const double cy = place(rng, 5, margin, h);
        const double cx = place(rng, 6, margin, w);

        std::vector<Frame> parts;
        double dirc = c;
        double dirs = s;
        const auto [stepc, steps] = kStep[static_cast<size_t>(k - 3)];
        for (int i = 0; i < k; ++i) {
            Frame f;
            f.cy = cy + ring * dirs;
            f.cx = cx + ring * dirc;
            random_rotation(rng, 10 + 4 * static_cast<uint64_t>(i), f.cos, f.sin);
            const double size = rng.uniform(20 + static_cast<uint64_t>(i), 0.75, 1.25);
            const double a = rng.uniform(30 + static_cast<uint64_t>(i), 0.6, 1.0);
            f.ax = rho * size / std::sqrt(a);
            f.ay = rho * size * std::sqrt(a);
            parts.push_back(f);
            const double nc = dirc * stepc - dirs * steps;
            dirs = dirc * steps + dirs * stepc;
            dirc = nc;
        }
        for (int r = 0; r < h; ++r) {
            for (int col = 0; col < w; ++col) {
                double best = 1e300;
                for (const auto& f : parts) {
                    const auto [u, v] = f.local(r, col);
                    best = std::min(best, u * u + v * v);
                }
                dist[static_cast<size_t>(r) * w + col] = best;
            }
        }
        return dist;
    }

    Frame f;
    random_rotation(rng, 2, f.cos, f.sin);
    f.ax = r_eq / std::sqrt(aspect);
    f.ay = r_eq * std::sqrt(aspect);
    const double reach = spec.object_shape == ObjectShape::Blob ? 1.6 : 1.1;
    f.cy = place(rng, 5, reach * f.ax + 1.0, h);
    f.cx = place(rng, 6, reach * f.ax + 1.0, w);

    // Blob boundary modulation 1 + sum_k (a_k cos k.theta + b_k sin k.theta),
    // evaluated through powers of z = u + iv to avoid trig calls.
    std::array<double, 6> harm{};
    for (size_t i = 0; i < harm.size(); ++i) {
        harm[i] = spec.object_shape == ObjectShape::Blob ? rng.uniform(40 + i, -0.12, 0.12) : 0.0;
    }
    for (int r = 0; r < h; ++r) {
        for (int col = 0; col < w; ++col) {
            const auto [u, v] = f.local(r, col);
            const double rad2 = u * u + v * v;
            double d = rad2;
            if (spec.object_shape == ObjectShape::Blob && rad2 > 0.0) {
                const double rad = std::sqrt(rad2);
                const double cu = u / rad;
                const double cv = v / rad;
                double re = cu * cu - cv * cv;  // e^{2i theta}
                double im = 2.0 * cu * cv;
                double m = 1.0;
                for (size_t k = 0; k < 3; ++k) {
                    m += harm[2 * k] * re + harm[2 * k + 1] * im;
                    const double nre = re * cu - im * cv;
                    im = re * cv + im * cu;
                    re = nre;
                }
                d = rad / m;
                d *= d;
            }
            dist[static_cast<size_t>(r) * w + col] = d;
        }
    }
    return dist;
}

double lorentz(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return 1.0 / (1.0 + z * z);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

// Orthonormal basis of the span of the XYZ weight vectors.
std::vector<std::vector<double>> xyz_row_space(const std::vector<Tristimulus>& weights) {
    std::vector<std::vector<double>> basis;
    for (int t = 0; t < 3; ++t) {
        std::vector<double> v(weights.size());
        for (size_t b = 0; b < weights.size(); ++b) {
            v[b] = weights[b][t];
        }
        const double n0 = std::sqrt(dot(v, v));
        if (n0 == 0.0) {
            continue;
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                const double p = dot(q, v);
                for (size_t b = 0; b < v.size(); ++b) {
                    v[b] -= p * q[b];
                }
            }
        }
        const double n = std::sqrt(dot(v, v));
        if (n <= 1e-9 * n0) {
            continue;
        }
        for (double& x : v) {
            x /= n;
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

void project_out(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) {
            const double p = dot(q, v);
            for (size_t b = 0; b < v.size(); ++b) {
                v[b] -= p * q[b];
            }
        }
    }
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, x < 0 ? -x : x);
    }
    return m;
}

// Piecewise-bilinear lattice noise in [-1, 1].
double value_noise(const CounterRng& rng, int r, int c, int cell, int lattice_w) {
    const int gy = r / cell;
    const int gx = c / cell;
    const double ty = static_cast<double>(r % cell) / cell;
    const double tx = static_cast<double>(c % cell) / cell;
    auto node = [&](int y, int x) {
        return rng.uniform(static_cast<uint64_t>(y) * static_cast<uint64_t>(lattice_w) + static_cast<uint64_t>(x),
                           -1.0, 1.0);
    };
    const double top = node(gy, gx) + tx * (node(gy, gx + 1) - node(gy, gx));
    const double bot = node(gy + 1, gx) + tx * (node(gy + 1, gx + 1) - node(gy + 1, gx));
    return top + ty * (bot - top);
}

}  // namespace

std::string to_string(ObjectShape shape) {
    switch (shape) {
        case ObjectShape::Ellipse:
            return "ellipse";
        case ObjectShape::Blob:
            return "blob";
        case ObjectShape::Fragmented:
            return "fragmented";
    }
    return "ellipse";
}

ObjectShape parse_object_shape(const std::string& name) {
    if (name == "ellipse") return ObjectShape::Ellipse;
    if (name == "blob") return ObjectShape::Blob;
    if (name == "fragmented") return ObjectShape::Fragmented;
    throw SpecError("unknown object_shape '" + name + "' (expected ellipse, blob or fragmented)");
}

SyntheticScene generate_scene(const SyntheticSceneSpec& spec) {
    if (spec.height < kMinCubeExtent || spec.width < kMinCubeExtent || spec.bands < kMinCubeBands) {
        throw SpecError("synthetic scene must be at least 8x8x4");
    }
    if (!(spec.object_area_ratio > 0.0 && spec.object_area_ratio < 1.0)) {
        throw SpecError("object_area_ratio must lie in (0, 1)");
    }
    if (!(spec.spectral_contrast >= 0.0) || !std::isfinite(spec.spectral_contrast)) {
        throw SpecError("spectral_contrast must be a nonnegative finite number");
    }
    if (!(spec.wavelength_max_nm > spec.wavelength_min_nm) || spec.wavelength_min_nm < 0.0) {
        throw SpecError("wavelength range must be increasing and nonnegative");
    }
    const size_t n_pix = static_cast<size_t>(spec.height) * spec.width;
    const auto target = static_cast<size_t>(std::llround(spec.object_area_ratio * static_cast<double>(n_pix)));
    if (target < 1 || target >= n_pix) {
        throw SpecError("object_area_ratio leaves no foreground or no background pixel");
    }

    const CounterRng root(spec.seed);
    const CounterRng shape_rng = root.substream(kShape);
    const CounterRng spec_rng = root.substream(kSpectra);
    const CounterRng tex_rng = root.substream(kTexture);

    SyntheticScene scene;
    std::vector<float> wl(static_cast<size_t>(spec.bands));
    const double span = spec.wavelength_max_nm - spec.wavelength_min_nm;
    for (int b = 0; b < spec.bands; ++b) {
        wl[static_cast<size_t>(b)] =
            static_cast<float>(spec.wavelength_min_nm + span * static_cast<double>(b) / (spec.bands - 1));
    }
    scene.cube = HsiCube(spec.height, spec.width, spec.bands, wl);
    scene.mask = Mask(spec.height, spec.width);

    // Object mask: the `target` pixels of smallest shape distance, ties by index.
    {
        const auto dist = shape_distance(spec, shape_rng, target);
        std::vector<uint32_t> order(n_pix);
        std::iota(order.begin(), order.end(), 0u);
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(target), order.end(),
                         [&](uint32_t a, uint32_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
        for (size_t i = 0; i < target; ++i) {
            scene.mask.data[order[i]] = 1;
        }
    }

    // Base spectra.
    const auto nb = static_cast<size_t>(spec.bands);
    std::vector<double> bg(nb), bump(nb);
    const double u0 = spec_rng.uniform(0);
    const double u1 = spec_rng.uniform(1);
    const double mu_bg = spec.wavelength_min_nm + span * spec_rng.uniform(2);
    const double mu_obj = spec.wavelength_min_nm + span * spec_rng.uniform(3, 0.15, 0.85);
    for (size_t b = 0; b < nb; ++b) {
        const double lam = wl[b];
        const double t = (lam - spec.wavelength_min_nm) / span;
        bg[b] = 0.28 + 0.12 * (u0 - 0.5) + 0.10 * (u1 - 0.5) * t + 0.10 * lorentz(lam, mu_bg, 0.15 * span);
        bump[b] = lorentz(lam, mu_obj, 0.08 * span);
    }

    std::vector<double> texture_dir(nb);
    double tex_amp = 0.0;
    if (spec.rgb_matched) {
        const auto row_space = xyz_row_space(xyz_band_weights(wl, cie1931_2deg()));
        project_out(bump, row_space);
        for (size_t b = 0; b < nb; ++b) {
            texture_dir[b] = spec_rng.uniform(100 + b, -1.0, 1.0);
        }
        project_out(texture_dir, row_space);
        const double m = max_abs(texture_dir);
        tex_amp = 0.015;
        for (double& x : texture_dir) {
            x = m > 0.0 ? tex_amp * x / m : 0.0;
        }
    } else {
        tex_amp = 0.04 * (*std::max_element(bg.begin(), bg.end()) + spec.spectral_contrast);
    }
    const double bump_peak = max_abs(bump);
    if (spec.spectral_contrast > 0.0 && bump_peak <= 1e-12) {
        throw SpecError("no metameric direction available for this band layout");
    }
    std::vector<double> obj(nb);
    for (size_t b = 0; b < nb; ++b) {
        obj[b] = bg[b] + (bump_peak > 0.0 ? spec.spectral_contrast * bump[b] / bump_peak : 0.0);
    }

    // Common offset keeps every textured value nonnegative; it leaves the
    // XYZ difference between the two spectra unchanged.
    double lowest = 1e300;
    for (size_t b = 0; b < nb; ++b) {
        lowest = std::min({lowest, bg[b], obj[b]});
    }
    const double shift = std::max(0.0, 0.02 + tex_amp - lowest);
    for (size_t b = 0; b < nb; ++b) {
        bg[b] += shift;
        obj[b] += shift;
    }

    if (spec.rgb_matched) {
        const double highest = std::max(*std::max_element(bg.begin(), bg.end()), *std::max_element(obj.begin(), obj.end()));
        if (highest + tex_amp > 1.0) {
            throw SpecError("spectral_contrast too large: metamer pair leaves [0, 1]");
        }
        if (sad(bg, obj) <= 0.05) {
            throw SpecError("spectral_contrast too small: metamer pair is within 0.05 rad");
        }
    }

    const int cell = 8;
    const int lattice_w = spec.width / cell + 2;
    for (int r = 0; r < spec.height; ++r) {
        for (int c = 0; c < spec.width; ++c) {
            const double tau = value_noise(tex_rng, r, c, cell, lattice_w);
            const auto& base = scene.mask.at(r, c) ? obj : bg;
            auto px = scene.cube.spectrum(r, c);
            for (size_t b = 0; b < nb; ++b) {
                double v = spec.rgb_matched ? base[b] + tau * texture_dir[b] : base[b] * (1.0 + 0.04 * tau);
                v = std::clamp(v, 0.0, 1.0);
                px[b] = static_cast<float>(v);
            }
        }
    }
    scene.background_spectrum = std::move(bg);
    scene.object_spectrum = std::move(obj);
    return scene;
}

}  // namespace hcod
