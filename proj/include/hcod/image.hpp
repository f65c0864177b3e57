#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hcod {

// Dense H x W x channels map, channel-interleaved (HWC), double precision.
// Used for the XYZ image, the spectral prompt and every saliency prediction.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c), data(static_cast<size_t>(h) * w * c, fill) {}

    size_t pixels() const { return static_cast<size_t>(height) * width; }
    size_t index(int r, int c, int ch = 0) const {
        return (static_cast<size_t>(r) * width + c) * channels + ch;
    }
    double& at(int r, int c, int ch = 0) { return data[index(r, c, ch)]; }
    double at(int r, int c, int ch = 0) const { return data[index(r, c, ch)]; }

    // Copy of one channel as a single-channel image.
    Image channel(int ch) const;

    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

// Single-channel prediction in [0,1] (S_f, S_d) or the 3-channel spectral prompt.
using SaliencyMap = Image;

// Binary ground truth, values exactly 0 or 1.
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    Mask() = default;
    Mask(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0) {}

    size_t pixels() const { return static_cast<size_t>(height) * width; }
    uint8_t& at(int r, int c) { return data[static_cast<size_t>(r) * width + c]; }
    uint8_t at(int r, int c) const { return data[static_cast<size_t>(r) * width + c]; }
    size_t count() const;

    // Throws ValidationError on non-binary values or a size mismatch.
    void validate() const;
    bool operator==(const Mask&) const = default;
};

// Shape check shared by the losses and metrics: single-channel map vs mask.
void require_same_shape(const Image& pred, const Mask& gt, const char* who);

}  // namespace hcod
