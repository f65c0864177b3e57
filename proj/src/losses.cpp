#include "hcod/losses.hpp"

#include <algorithm>
#include <cmath>

namespace hcod {

LossTerm bce_loss(const SaliencyMap& pred, const Mask& gt) {
    require_same_shape(pred, gt, "bce_loss");
    LossTerm out{0.0, Image(pred.height, pred.width, 1)};
    const double inv_n = 1.0 / static_cast<double>(pred.pixels());
    double acc = 0.0;
    for (size_t i = 0; i < pred.pixels(); ++i) {
        const double s = std::clamp(pred.data[i], kBceClampEps, 1.0 - kBceClampEps);
        const double g = gt.data[i];
        acc -= g * std::log(s) + (1.0 - g) * std::log(1.0 - s);
        out.grad.data[i] = (s - g) / (s * (1.0 - s)) * inv_n;
    }
    out.value = acc * inv_n;
    return out;
}

LossTerm iou_loss(const SaliencyMap& pred, const Mask& gt) {
    require_same_shape(pred, gt, "iou_loss");
    double inter = 0.0;
    double sum_s = 0.0;
    double sum_g = 0.0;
    for (size_t i = 0; i < pred.pixels(); ++i) {
        inter += pred.data[i] * gt.data[i];
        sum_s += pred.data[i];
        sum_g += gt.data[i];
    }
    const double num = inter + kIouSmoothing;
    const double den = sum_s + sum_g - inter + kIouSmoothing;
    LossTerm out{1.0 - num / den, Image(pred.height, pred.width, 1)};
    // d/ds_i of -(I + l)/(U + l) with dI/ds_i = g_i, dU/ds_i = 1 - g_i.
    const double den2 = den * den;
    for (size_t i = 0; i < pred.pixels(); ++i) {
        const double g = gt.data[i];
        out.grad.data[i] = -(g * den - num * (1.0 - g)) / den2;
    }
    return out;
}

LossReport total_loss(const SaliencyMap& s_d, const SaliencyMap& s_f, const Mask& gt) {
    const LossTerm bd = bce_loss(s_d, gt);
    const LossTerm id = iou_loss(s_d, gt);
    const LossTerm bf = bce_loss(s_f, gt);
    const LossTerm jf = iou_loss(s_f, gt);

    LossReport r;
    r.bce_dec = bd.value;
    r.iou_dec = id.value;
    r.bce_final = bf.value;
    r.iou_final = jf.value;
    r.dec = bd.value + id.value;
    r.final = bf.value + jf.value;
    r.total = r.dec + r.final;
    r.grad_dec = bd.grad;
    r.grad_final = bf.grad;
    for (size_t i = 0; i < r.grad_dec.data.size(); ++i) {
        r.grad_dec.data[i] += id.grad.data[i];
        r.grad_final.data[i] += jf.grad.data[i];
    }
    return r;
}

}  // namespace hcod
