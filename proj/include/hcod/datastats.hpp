#pragma once

#include <array>
#include <string>
#include <vector>

#include "hcod/image.hpp"

namespace hcod {

inline constexpr double kTinyAreaThreshold = 0.005;   // tiny iff area ratio < this
inline constexpr double kComplexEdgeThreshold = 0.3;  // complex iff edge ratio > this

struct SceneStats {
    double area_ratio = 0.0;
    double edge_perimeter_ratio = 0.0;
    double centroid_row = 0.0;  // in [0, 1]
    double centroid_col = 0.0;
    bool is_tiny = false;
    bool is_complex_edge = false;
};

double area_ratio(const Mask& mask);

// Foreground pixels with a 4-neighbour outside the foreground (the frame
// counts as outside).
size_t boundary_pixel_count(const Mask& mask);

// Boundary pixel count over the pixel count of the foreground bounding box's
// outline: 2(h + w) - 4, or h * w for a one-pixel-thick box.
// Throws ValidationError on an empty mask.
double edge_perimeter_ratio(const Mask& mask);

// Mean foreground coordinate normalized by (H - 1, W - 1); a unit extent
// maps to 0. Throws ValidationError on an empty mask.
std::array<double, 2> centroid(const Mask& mask);

// Full statistics for a nonempty mask.
SceneStats scene_stats(const Mask& mask);

inline constexpr int kAreaBins = 20;
inline constexpr double kAreaHistMin = 1e-4;
inline constexpr double kAreaHistMax = 1.0;
inline constexpr int kEdgeBins = 20;
inline constexpr double kEdgeHistMax = 2.0;
inline constexpr int kCentroidGrid = 16;

struct Histogram {
    std::vector<double> edges;  // bins + 1 boundaries
    std::vector<int> counts;
};

struct DatasetStats {
    std::vector<SceneStats> scenes;
    Histogram area;     // log-spaced; values outside the range go to the end bins
    Histogram edge;     // linear; values outside the range go to the end bins
    std::vector<int> centroid_grid;  // kCentroidGrid x kCentroidGrid, row-major
    int tiny_count = 0;
    int complex_count = 0;
};

int area_bin(double ratio);
int edge_bin(double ratio);
int centroid_cell(double frac);

// Throws ValidationError on an empty list or any empty mask.
DatasetStats dataset_stats(const std::vector<Mask>& masks);

// Per-mask CSV rows: name,area_ratio,edge_perimeter_ratio,centroid_row,centroid_col,tiny,complex_edge
std::string stats_csv(const DatasetStats& stats, const std::vector<std::string>& names);

// The three histograms plus flag counts as JSON text.
std::string stats_json(const DatasetStats& stats);

}  // namespace hcod
