#include "hcod/image.hpp"

#include <algorithm>
#include <string>

#include "hcod/errors.hpp"

namespace hcod {

Image Image::channel(int ch) const {
    Image out(height, width, 1);
    for (size_t i = 0; i < pixels(); ++i) {
        out.data[i] = data[i * channels + ch];
    }
    return out;
}

size_t Mask::count() const {
    return static_cast<size_t>(std::count(data.begin(), data.end(), uint8_t{1}));
}

void Mask::validate() const {
    if (height <= 0 || width <= 0 || data.size() != pixels()) {
        throw ValidationError("mask: dimensions do not match payload");
    }
    for (auto v : data) {
        if (v > 1) {
            throw ValidationError("mask: values must be 0 or 1");
        }
    }
}

void require_same_shape(const Image& pred, const Mask& gt, const char* who) {
    if (pred.channels != 1 || pred.height != gt.height || pred.width != gt.width) {
        throw ValidationError(std::string(who) + ": prediction " + std::to_string(pred.height) + "x" +
                              std::to_string(pred.width) + "x" + std::to_string(pred.channels) +
                              " does not match mask " + std::to_string(gt.height) + "x" +
                              std::to_string(gt.width));
    }
}

}  // namespace hcod
