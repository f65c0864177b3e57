#include "hcod/fde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hcod/errors.hpp"
#include "hcod/rng.hpp"

namespace hcod {

namespace {

FdeParams shaped(int in_channels, int channels, int spatial_kernel) {
    if (spatial_kernel < 1 || spatial_kernel % 2 == 0) {
        throw ValidationError("fde: spatial kernel size must be odd, got " + std::to_string(spatial_kernel));
    }
    FdeParams p;
    p.in_channels = in_channels;
    p.channels = channels;
    p.spatial_kernel = spatial_kernel;
    p.depthwise.assign(static_cast<size_t>(in_channels) * 9, 0.0);
    p.depthwise_bias.assign(static_cast<size_t>(in_channels), 0.0);
    p.pointwise = Linear(in_channels, channels);
    const int reduced = std::max(1, channels / 4);
    p.ca_reduce = Linear(channels, reduced);
    p.ca_expand = Linear(reduced, channels);
    p.sa_kernel.assign(static_cast<size_t>(2 * spatial_kernel * spatial_kernel), 0.0);
    p.pa = Linear(channels, channels);
    p.proj.assign(static_cast<size_t>(channels), 0.0);
    return p;
}

}  // namespace

std::vector<ParamRef> FdeParams::parameters() {
    return {
        {"fde.depthwise", {in_channels, 3, 3}, &depthwise},
        {"fde.depthwise_bias", {in_channels}, &depthwise_bias},
        {"fde.pointwise.weight", {pointwise.out, pointwise.in}, &pointwise.weight},
        {"fde.pointwise.bias", {pointwise.out}, &pointwise.bias},
        {"fde.ca_reduce.weight", {ca_reduce.out, ca_reduce.in}, &ca_reduce.weight},
        {"fde.ca_reduce.bias", {ca_reduce.out}, &ca_reduce.bias},
        {"fde.ca_expand.weight", {ca_expand.out, ca_expand.in}, &ca_expand.weight},
        {"fde.ca_expand.bias", {ca_expand.out}, &ca_expand.bias},
        {"fde.sa_kernel", {2, spatial_kernel, spatial_kernel}, &sa_kernel},
        {"fde.sa_bias", {1}, &sa_bias},
        {"fde.pa.weight", {pa.out, pa.in}, &pa.weight},
        {"fde.pa.bias", {pa.out}, &pa.bias},
        {"fde.proj", {channels}, &proj},
        {"fde.proj_bias", {1}, &proj_bias},
    };
}

FdeParams zero_fde(int in_channels, int channels, int spatial_kernel) {
    return shaped(in_channels, channels, spatial_kernel);
}

FdeParams init_fde(uint64_t seed, int in_channels, int channels, int spatial_kernel) {
    FdeParams p = shaped(in_channels, channels, spatial_kernel);
    const CounterRng root = CounterRng(seed).substream(0xfde);
    const CounterRng dw = root.substream(1);
    const double a = std::sqrt(3.0 / 9.0);
    for (size_t i = 0; i < p.depthwise.size(); ++i) {
        p.depthwise[i] = dw.uniform(i, -a, a);
    }
    p.pointwise = init_linear(in_channels, channels, root.substream(2));
    p.ca_reduce = init_linear(channels, p.ca_reduce.out, root.substream(3));
    p.ca_expand = init_linear(p.ca_expand.in, channels, root.substream(4));
    const CounterRng sa = root.substream(5);
    const double b = std::sqrt(3.0 / static_cast<double>(p.sa_kernel.size()));
    for (size_t i = 0; i < p.sa_kernel.size(); ++i) {
        p.sa_kernel[i] = sa.uniform(i, -b, b);
    }
    p.pa = init_linear(channels, channels, root.substream(6));
    return p;
}

FeatureMap image_to_features(const Image& img) {
    FeatureMap f(1, img.channels, img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                f.at(0, c, y, x) = img.at(y, x, c);
            }
        }
    }
    return f;
}

Image features_to_image(const FeatureMap& f, int batch_index) {
    Image img(f.height, f.width, f.channels);
    for (int c = 0; c < f.channels; ++c) {
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                img.at(y, x, c) = f.at(batch_index, c, y, x);
            }
        }
    }
    return img;
}

FeatureMap extract_features(const Image& i_m, const FdeParams& params) {
    if (i_m.channels != params.in_channels) {
        throw ValidationError("extract_features: expected " + std::to_string(params.in_channels) +
                              " input channels, got " + std::to_string(i_m.channels));
    }
    const FeatureMap in = image_to_features(i_m);
    FeatureMap dw(1, in.channels, in.height, in.width);
    for (int c = 0; c < in.channels; ++c) {
        const double* k = &params.depthwise[static_cast<size_t>(c) * 9];
        for (int y = 0; y < in.height; ++y) {
            for (int x = 0; x < in.width; ++x) {
                double s = params.depthwise_bias[static_cast<size_t>(c)];
                for (int dy = -1; dy <= 1; ++dy) {
                    const int yy = y + dy;
                    if (yy < 0 || yy >= in.height) {
                        continue;
                    }
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = x + dx;
                        if (xx < 0 || xx >= in.width) {
                            continue;
                        }
                        s += k[(dy + 1) * 3 + (dx + 1)] * in.at(0, c, yy, xx);
                    }
                }
                dw.at(0, c, y, x) = s;
            }
        }
    }
    return pointwise_conv(dw, params.pointwise);
}

FeatureMap channel_attention(const FeatureMap& f, const FdeParams& params) {
    FeatureMap out(f.batch, f.channels, 1, 1);
    std::vector<double> pooled(static_cast<size_t>(f.channels));
    std::vector<double> hidden(static_cast<size_t>(params.ca_reduce.out));
    std::vector<double> gates(static_cast<size_t>(f.channels));
    const double inv = 1.0 / static_cast<double>(f.plane());
    for (int b = 0; b < f.batch; ++b) {
        for (int c = 0; c < f.channels; ++c) {
            const double* src = &f.data[f.index(b, c, 0, 0)];
            double s = 0.0;
            for (size_t p = 0; p < f.plane(); ++p) {
                s += src[p];
            }
            pooled[static_cast<size_t>(c)] = s * inv;
        }
        params.ca_reduce.apply(pooled, hidden);
        for (double& v : hidden) {
            v = std::max(v, 0.0);
        }
        params.ca_expand.apply(hidden, gates);
        for (int c = 0; c < f.channels; ++c) {
            out.at(b, c, 0, 0) = sigmoid(gates[static_cast<size_t>(c)]);
        }
    }
    return out;
}

FeatureMap spatial_attention(const FeatureMap& f, const FdeParams& params) {
    const int k = params.spatial_kernel;
    if (k < 1 || k % 2 == 0) {
        throw ValidationError("spatial_attention: kernel size must be odd, got " + std::to_string(k));
    }
    if (params.sa_kernel.size() != static_cast<size_t>(2 * k * k)) {
        throw ValidationError("spatial_attention: kernel weights do not match kernel size");
    }
    const int r = k / 2;
    FeatureMap pooled(f.batch, 2, f.height, f.width);
    for (int b = 0; b < f.batch; ++b) {
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                double s = 0.0;
                double m = f.at(b, 0, y, x);
                for (int c = 0; c < f.channels; ++c) {
                    const double v = f.at(b, c, y, x);
                    s += v;
                    m = std::max(m, v);
                }
                pooled.at(b, 0, y, x) = s / f.channels;
                pooled.at(b, 1, y, x) = m;
            }
        }
    }
    FeatureMap out(f.batch, 1, f.height, f.width);
    for (int b = 0; b < f.batch; ++b) {
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                double s = params.sa_bias[0];
                for (int c = 0; c < 2; ++c) {
                    for (int dy = -r; dy <= r; ++dy) {
                        const int yy = y + dy;
                        if (yy < 0 || yy >= f.height) {
                            continue;
                        }
                        for (int dx = -r; dx <= r; ++dx) {
                            const int xx = x + dx;
                            if (xx < 0 || xx >= f.width) {
                                continue;
                            }
                            s += params.sa_kernel[static_cast<size_t>((c * k + dy + r) * k + dx + r)] *
                                 pooled.at(b, c, yy, xx);
                        }
                    }
                }
                out.at(b, 0, y, x) = sigmoid(s);
            }
        }
    }
    return out;
}

FeatureMap pixel_attention(const FeatureMap& f, const FdeParams& params) {
    FeatureMap out = pointwise_conv(f, params.pa);
    for (double& v : out.data) {
        v = sigmoid(v);
    }
    return out;
}

FeatureMap combine_attention(const FeatureMap& ca, const FeatureMap& sa, const FeatureMap& pa) {
    if (ca.batch != pa.batch || ca.channels != pa.channels || ca.height != 1 || ca.width != 1 ||
        sa.batch != pa.batch || sa.channels != 1 || sa.height != pa.height || sa.width != pa.width) {
        throw ValidationError("combine_attention: CA/SA/PA shapes do not broadcast to B x C x H x W");
    }
    FeatureMap a = pa;
    for (int b = 0; b < pa.batch; ++b) {
        for (int c = 0; c < pa.channels; ++c) {
            const double g = ca.at(b, c, 0, 0);
            for (int y = 0; y < pa.height; ++y) {
                for (int x = 0; x < pa.width; ++x) {
                    a.at(b, c, y, x) = g * sa.at(b, 0, y, x) * pa.at(b, c, y, x);
                }
            }
        }
    }
    return a;
}

Image residual_details(const FeatureMap& attention, const FeatureMap& f, const std::vector<double>& proj,
                       double proj_bias) {
    if (!attention.same_shape(f) || proj.size() != static_cast<size_t>(f.channels) || f.batch < 1) {
        throw ValidationError("enhance: attention/projection shape mismatch");
    }
    Image r(f.height, f.width, 1);
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            double v = proj_bias;
            for (int c = 0; c < f.channels; ++c) {
                v += proj[static_cast<size_t>(c)] * (attention.at(0, c, y, x) * f.at(0, c, y, x));
            }
            r.at(y, x) = v;
        }
    }
    return r;
}

SaliencyMap inject_details(const SaliencyMap& s_f, const FeatureMap& attention, const FeatureMap& f,
                           const std::vector<double>& proj, double proj_bias) {
    if (s_f.channels != 1 || f.height != s_f.height || f.width != s_f.width) {
        throw ValidationError("enhance: feature map " + std::to_string(f.height) + "x" + std::to_string(f.width) +
                              " does not match prediction " + std::to_string(s_f.height) + "x" +
                              std::to_string(s_f.width));
    }
    return apply_residual(s_f, residual_details(attention, f, proj, proj_bias));
}

SaliencyMap apply_residual(const SaliencyMap& s_f, const Image& residual) {
    if (!s_f.same_shape(residual)) {
        throw ValidationError("enhance: residual and prediction differ in shape");
    }
    SaliencyMap out = s_f;
    for (size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = std::clamp(s_f.data[i] + residual.data[i], 0.0, 1.0);
    }
    return out;
}

Image detail_residual(const FeatureMap& f, const FdeParams& params) {
    if (f.channels != params.channels) {
        throw ValidationError("enhance: feature channels do not match parameters");
    }
    const FeatureMap a =
        combine_attention(channel_attention(f, params), spatial_attention(f, params), pixel_attention(f, params));
    return residual_details(a, f, params.proj, params.proj_bias[0]);
}

SaliencyMap enhance(const SaliencyMap& s_f, const FeatureMap& f, const FdeParams& params) {
    if (f.height != s_f.height || f.width != s_f.width) {
        throw ValidationError("enhance: feature map and prediction differ in size");
    }
    return apply_residual(s_f, detail_residual(f, params));
}

}  // namespace hcod
