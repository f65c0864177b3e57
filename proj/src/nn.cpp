#include "hcod/nn.hpp"

#include <algorithm>
#include <cmath>

#include "hcod/tensor.hpp"

namespace hcod {

void Linear::apply(std::span<const double> x, std::span<double> y) const {
    for (int o = 0; o < out; ++o) {
        const double* row = weight.data() + static_cast<size_t>(o) * in;
        double s = bias[static_cast<size_t>(o)];
        for (int i = 0; i < in; ++i) {
            s += row[i] * x[static_cast<size_t>(i)];
        }
        y[static_cast<size_t>(o)] = s;
    }
}

Linear init_linear(int in, int out, const CounterRng& rng, double gain) {
    Linear l(in, out);
    const double a = gain * std::sqrt(3.0 / in);
    for (size_t i = 0; i < l.weight.size(); ++i) {
        l.weight[i] = rng.uniform(i, -a, a);
    }
    return l;
}

void LayerNorm::apply(std::span<const double> x, std::span<double> y) const {
    const auto n = x.size();
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) {
        var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (size_t i = 0; i < n; ++i) {
        y[i] = (x[i] - mean) * inv * gamma[i] + beta[i];
    }
}

FeatureMap pointwise_conv(const FeatureMap& in, const Linear& layer) {
    FeatureMap out(in.batch, layer.out, in.height, in.width);
    const size_t plane = in.plane();
    for (int b = 0; b < in.batch; ++b) {
        for (int o = 0; o < layer.out; ++o) {
            double* dst = &out.data[out.index(b, o, 0, 0)];
            std::fill(dst, dst + plane, layer.bias[static_cast<size_t>(o)]);
            for (int i = 0; i < layer.in; ++i) {
                const double wgt = layer.w(o, i);
                const double* src = &in.data[in.index(b, i, 0, 0)];
                for (size_t p = 0; p < plane; ++p) {
                    dst[p] += wgt * src[p];
                }
            }
        }
    }
    return out;
}

double TokenMask::kept_fraction() const {
    if (data.empty()) {
        return 0.0;
    }
    size_t kept = 0;
    for (auto v : data) {
        kept += v;
    }
    return static_cast<double>(kept) / static_cast<double>(data.size());
}

}  // namespace hcod
