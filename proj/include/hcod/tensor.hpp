#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hcod {

// B x N x C token sequence laid out on a rows x cols patch grid (row-major).
struct TokenTensor {
    int batch = 0;
    int tokens = 0;
    int channels = 0;
    int grid_rows = 0;
    int grid_cols = 0;
    std::vector<double> data;

    TokenTensor() = default;
    TokenTensor(int b, int rows, int cols, int c)
        : batch(b),
          tokens(rows * cols),
          channels(c),
          grid_rows(rows),
          grid_cols(cols),
          data(static_cast<size_t>(b) * rows * cols * c, 0.0) {}

    size_t index(int b, int n, int c = 0) const {
        return (static_cast<size_t>(b) * tokens + n) * channels + c;
    }
    double& at(int b, int n, int c) { return data[index(b, n, c)]; }
    double at(int b, int n, int c) const { return data[index(b, n, c)]; }

    std::span<double> token(int b, int n) { return {data.data() + index(b, n), static_cast<size_t>(channels)}; }
    std::span<const double> token(int b, int n) const {
        return {data.data() + index(b, n), static_cast<size_t>(channels)};
    }

    bool same_shape(const TokenTensor& o) const {
        return batch == o.batch && tokens == o.tokens && channels == o.channels && grid_rows == o.grid_rows &&
               grid_cols == o.grid_cols;
    }
    bool operator==(const TokenTensor&) const = default;
};

// Per-token saliency scores, B x N.
struct TokenScores {
    int batch = 0;
    int tokens = 0;
    std::vector<double> data;

    double at(int b, int n) const { return data[static_cast<size_t>(b) * tokens + n]; }
};

// Binary keep/drop decision per token, B x N.
struct TokenMask {
    int batch = 0;
    int tokens = 0;
    std::vector<uint8_t> data;

    TokenMask() = default;
    TokenMask(int b, int n, uint8_t fill = 1) : batch(b), tokens(n), data(static_cast<size_t>(b) * n, fill) {}

    uint8_t at(int b, int n) const { return data[static_cast<size_t>(b) * tokens + n]; }
    uint8_t& at(int b, int n) { return data[static_cast<size_t>(b) * tokens + n]; }
    double kept_fraction() const;
    bool operator==(const TokenMask&) const = default;
};

// B x C x H x W feature map (NCHW).
struct FeatureMap {
    int batch = 0;
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int b, int c, int h, int w, double fill = 0.0)
        : batch(b), channels(c), height(h), width(w), data(static_cast<size_t>(b) * c * h * w, fill) {}

    size_t plane() const { return static_cast<size_t>(height) * width; }
    size_t index(int b, int c, int y, int x) const {
        return ((static_cast<size_t>(b) * channels + c) * height + y) * width + x;
    }
    double& at(int b, int c, int y, int x) { return data[index(b, c, y, x)]; }
    double at(int b, int c, int y, int x) const { return data[index(b, c, y, x)]; }
    bool same_shape(const FeatureMap& o) const {
        return batch == o.batch && channels == o.channels && height == o.height && width == o.width;
    }
    bool operator==(const FeatureMap&) const = default;
};

}  // namespace hcod
