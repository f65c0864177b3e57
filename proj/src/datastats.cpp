#include "hcod/datastats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "hcod/errors.hpp"
#include "hcod/parallel.hpp"

namespace hcod {

namespace {

void require_nonempty(const Mask& mask, const char* who) {
    if (mask.count() == 0) {
        throw ValidationError(std::string(who) + ": mask has no foreground pixels");
    }
}

Histogram make_hist(int bins, double lo, double hi, bool log_scale) {
    Histogram h;
    h.counts.assign(static_cast<size_t>(bins), 0);
    for (int i = 0; i <= bins; ++i) {
        const double f = static_cast<double>(i) / bins;
        h.edges.push_back(log_scale ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    return h;
}

}  // namespace

double area_ratio(const Mask& mask) {
    return static_cast<double>(mask.count()) / static_cast<double>(mask.pixels());
}

size_t boundary_pixel_count(const Mask& mask) {
    size_t n = 0;
    for (int r = 0; r < mask.height; ++r) {
        for (int c = 0; c < mask.width; ++c) {
            if (!mask.at(r, c)) {
                continue;
            }
            const bool edge = r == 0 || c == 0 || r == mask.height - 1 || c == mask.width - 1 ||
                              !mask.at(r - 1, c) || !mask.at(r + 1, c) || !mask.at(r, c - 1) || !mask.at(r, c + 1);
            n += edge;
        }
    }
    return n;
}

double edge_perimeter_ratio(const Mask& mask) {
    require_nonempty(mask, "edge_perimeter_ratio");
    int r0 = mask.height, r1 = -1, c0 = mask.width, c1 = -1;
    for (int r = 0; r < mask.height; ++r) {
        for (int c = 0; c < mask.width; ++c) {
            if (mask.at(r, c)) {
                r0 = std::min(r0, r);
                r1 = std::max(r1, r);
                c0 = std::min(c0, c);
                c1 = std::max(c1, c);
            }
        }
    }
    const long h = r1 - r0 + 1;
    const long w = c1 - c0 + 1;
    const long outline = (h == 1 || w == 1) ? h * w : 2 * (h + w) - 4;
    return static_cast<double>(boundary_pixel_count(mask)) / static_cast<double>(outline);
}

std::array<double, 2> centroid(const Mask& mask) {
    require_nonempty(mask, "centroid");
    double sr = 0.0;
    double sc = 0.0;
    for (int r = 0; r < mask.height; ++r) {
        for (int c = 0; c < mask.width; ++c) {
            if (mask.at(r, c)) {
                sr += r;
                sc += c;
            }
        }
    }
    const double n = static_cast<double>(mask.count());
    const double dr = mask.height > 1 ? mask.height - 1.0 : 1.0;
    const double dc = mask.width > 1 ? mask.width - 1.0 : 1.0;
    return {sr / n / dr, sc / n / dc};
}

SceneStats scene_stats(const Mask& mask) {
    SceneStats s;
    s.area_ratio = area_ratio(mask);
    s.edge_perimeter_ratio = edge_perimeter_ratio(mask);
    const auto c = centroid(mask);
    s.centroid_row = c[0];
    s.centroid_col = c[1];
    s.is_tiny = s.area_ratio < kTinyAreaThreshold;
    s.is_complex_edge = s.edge_perimeter_ratio > kComplexEdgeThreshold;
    return s;
}

int area_bin(double ratio) {
    if (ratio <= kAreaHistMin) {
        return 0;
    }
    const double f = std::log(ratio / kAreaHistMin) / std::log(kAreaHistMax / kAreaHistMin);
    return std::clamp(static_cast<int>(f * kAreaBins), 0, kAreaBins - 1);
}

int edge_bin(double ratio) {
    return std::clamp(static_cast<int>(ratio / kEdgeHistMax * kEdgeBins), 0, kEdgeBins - 1);
}

int centroid_cell(double frac) { return std::clamp(static_cast<int>(frac * kCentroidGrid), 0, kCentroidGrid - 1); }

DatasetStats dataset_stats(const std::vector<Mask>& masks) {
    if (masks.empty()) {
        throw ValidationError("dataset_stats: no masks");
    }
    DatasetStats out;
    out.scenes.resize(masks.size());
    parallel_for(masks.size(), [&](size_t i) { out.scenes[i] = scene_stats(masks[i]); });

    out.area = make_hist(kAreaBins, kAreaHistMin, kAreaHistMax, true);
    out.edge = make_hist(kEdgeBins, 0.0, kEdgeHistMax, false);
    out.centroid_grid.assign(static_cast<size_t>(kCentroidGrid * kCentroidGrid), 0);
    for (const auto& s : out.scenes) {
        ++out.area.counts[static_cast<size_t>(area_bin(s.area_ratio))];
        ++out.edge.counts[static_cast<size_t>(edge_bin(s.edge_perimeter_ratio))];
        ++out.centroid_grid[static_cast<size_t>(centroid_cell(s.centroid_row) * kCentroidGrid +
                                                centroid_cell(s.centroid_col))];
        out.tiny_count += s.is_tiny;
        out.complex_count += s.is_complex_edge;
    }
    return out;
}

std::string stats_csv(const DatasetStats& stats, const std::vector<std::string>& names) {
    std::string out = "mask,area_ratio,edge_perimeter_ratio,centroid_row,centroid_col,tiny,complex_edge\n";
    char buf[200];
    for (size_t i = 0; i < stats.scenes.size(); ++i) {
        const auto& s = stats.scenes[i];
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f,%d,%d\n", s.area_ratio, s.edge_perimeter_ratio,
                      s.centroid_row, s.centroid_col, s.is_tiny ? 1 : 0, s.is_complex_edge ? 1 : 0);
        out += i < names.size() ? names[i] : std::to_string(i);
        out += buf;
    }
    return out;
}

std::string stats_json(const DatasetStats& stats) {
    nlohmann::ordered_json j;
    j["count"] = stats.scenes.size();
    j["tiny_count"] = stats.tiny_count;
    j["complex_edge_count"] = stats.complex_count;
    j["area_ratio"] = {{"scale", "log"}, {"edges", stats.area.edges}, {"counts", stats.area.counts}};
    j["edge_perimeter_ratio"] = {{"scale", "linear"}, {"edges", stats.edge.edges}, {"counts", stats.edge.counts}};
    nlohmann::json grid = nlohmann::json::array();
    for (int r = 0; r < kCentroidGrid; ++r) {
        grid.push_back(std::vector<int>(stats.centroid_grid.begin() + r * kCentroidGrid,
                                        stats.centroid_grid.begin() + (r + 1) * kCentroidGrid));
    }
    j["centroid"] = {{"rows", kCentroidGrid}, {"cols", kCentroidGrid}, {"counts", grid}};
    return j.dump(2) + "\n";
}

}  // namespace hcod
