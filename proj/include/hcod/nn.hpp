#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hcod/rng.hpp"
#include "hcod/tensor.hpp"

namespace hcod {

// y = W x + b with W stored out x in, row-major.
struct Linear {
    int in = 0;
    int out = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    Linear() = default;
    Linear(int in_dim, int out_dim)
        : in(in_dim), out(out_dim), weight(static_cast<size_t>(in_dim) * out_dim, 0.0), bias(out_dim, 0.0) {}

    double w(int o, int i) const { return weight[static_cast<size_t>(o) * in + i]; }
    double& w(int o, int i) { return weight[static_cast<size_t>(o) * in + i]; }

    void apply(std::span<const double> x, std::span<double> y) const;
};

// Uniform(-gain*sqrt(3/in), gain*sqrt(3/in)) weights, zero bias. Draws come from
// `rng` at counters [0, in*out), so a layer is fully determined by its stream.
Linear init_linear(int in, int out, const CounterRng& rng, double gain = 1.0);

struct LayerNorm {
    std::vector<double> gamma;
    std::vector<double> beta;
    double eps = 1e-5;

    explicit LayerNorm(int channels = 0) : gamma(channels, 1.0), beta(channels, 0.0) {}
    void apply(std::span<const double> x, std::span<double> y) const;
};

// 1x1 convolution: out[b,o,y,x] = bias[o] + sum_i W[o,i] * in[b,i,y,x].
FeatureMap pointwise_conv(const FeatureMap& in, const Linear& layer);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Exact (erf) GELU and its derivative.
inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865476)); }
inline double gelu_grad(double x) {
    return 0.5 * (1.0 + std::erf(x * 0.7071067811865476)) + x * 0.3989422804014327 * std::exp(-0.5 * x * x);
}

// Named view over a parameter vector, used for weight snapshots.
struct ParamRef {
    std::string name;
    std::vector<int> shape;
    std::vector<double>* values;
};

}  // namespace hcod
