#pragma once

#include "hcod/image.hpp"

namespace hcod {

inline constexpr double kBceClampEps = 1e-7;
inline constexpr double kIouSmoothing = 1.0;

struct LossTerm {
    double value = 0.0;
    Image grad;  // d value / d prediction, same shape as the prediction
};

// Pixel-mean binary cross-entropy on predictions clamped to [eps, 1-eps].
// grad = (s - g) / (s (1 - s)) / HW evaluated at the clamped s.
LossTerm bce_loss(const SaliencyMap& pred, const Mask& gt);

// Soft IoU loss 1 - (sum sg + l) / (sum s + sum g - sum sg + l), l = 1.
LossTerm iou_loss(const SaliencyMap& pred, const Mask& gt);

struct LossReport {
    double bce_dec = 0.0;
    double iou_dec = 0.0;
    double bce_final = 0.0;
    double iou_final = 0.0;
    double dec = 0.0;    // BCE(S_d) + IoU(S_d)
    double final = 0.0;  // BCE(S_f) + IoU(S_f)
    double total = 0.0;  // dec + final
    Image grad_dec;      // d total / d S_d
    Image grad_final;    // d total / d S_f
};

LossReport total_loss(const SaliencyMap& s_d, const SaliencyMap& s_f, const Mask& gt);

}  // namespace hcod
