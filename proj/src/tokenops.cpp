#include "hcod/tokenops.hpp"

#include <algorithm>
#include <string>

#include "hcod/errors.hpp"

namespace hcod {

void EncoderConfig::validate() const {
    if (patch_size < 1 || depth < 1 || channels < 1 || heads < 1) {
        throw ValidationError("encoder: patch size, depth, channels and heads must be positive");
    }
    if (channels % heads != 0) {
        throw ValidationError("encoder: channels (" + std::to_string(channels) + ") not divisible by heads (" +
                              std::to_string(heads) + ")");
    }
    if (!(sgtd_tau >= 0.0 && sgtd_tau <= 1.0)) {
        throw ValidationError("encoder: sgtd_tau must lie in [0, 1]");
    }
    for (int l : prompt_layers) {
        if (l < 0 || l >= depth) {
            throw ValidationError("encoder: prompt layer " + std::to_string(l) + " out of range");
        }
    }
}

bool EncoderConfig::prompts_after(int block) const {
    return prompt_layers.empty() || std::find(prompt_layers.begin(), prompt_layers.end(), block) != prompt_layers.end();
}

TokenTensor patchify(std::span<const Image> images, const Linear& proj, int patch) {
    if (images.empty()) {
        throw ValidationError("patchify: no images");
    }
    const Image& first = images.front();
    if (patch < 1 || first.height % patch != 0 || first.width % patch != 0) {
        throw ValidationError("patchify: " + std::to_string(first.height) + "x" + std::to_string(first.width) +
                              " is not divisible by patch size " + std::to_string(patch));
    }
    if (proj.in != patch * patch * first.channels) {
        throw ValidationError("patchify: projection expects " + std::to_string(proj.in) + " inputs, patch has " +
                              std::to_string(patch * patch * first.channels));
    }
    const int rows = first.height / patch;
    const int cols = first.width / patch;
    TokenTensor out(static_cast<int>(images.size()), rows, cols, proj.out);
    std::vector<double> flat(static_cast<size_t>(proj.in));
    for (int b = 0; b < out.batch; ++b) {
        const Image& img = images[static_cast<size_t>(b)];
        if (!img.same_shape(first)) {
            throw ValidationError("patchify: batch images differ in shape");
        }
        for (int gr = 0; gr < rows; ++gr) {
            for (int gc = 0; gc < cols; ++gc) {
                size_t k = 0;
                for (int dy = 0; dy < patch; ++dy) {
                    for (int dx = 0; dx < patch; ++dx) {
                        for (int ch = 0; ch < img.channels; ++ch) {
                            flat[k++] = img.at(gr * patch + dy, gc * patch + dx, ch);
                        }
                    }
                }
                proj.apply(flat, out.token(b, gr * cols + gc));
            }
        }
    }
    return out;
}

TokenTensor patchify(const Image& image, const Linear& proj, int patch) {
    return patchify(std::span<const Image>(&image, 1), proj, patch);
}

TokenScores sgtd_score(const TokenTensor& x_s) {
    TokenScores s{x_s.batch, x_s.tokens, std::vector<double>(static_cast<size_t>(x_s.batch) * x_s.tokens)};
    for (int b = 0; b < x_s.batch; ++b) {
        for (int n = 0; n < x_s.tokens; ++n) {
            double acc = 0.0;
            for (double v : x_s.token(b, n)) {
                acc += v;
            }
            s.data[static_cast<size_t>(b) * x_s.tokens + n] = acc / x_s.channels;
        }
    }
    return s;
}

TokenScores normalize_scores(const TokenScores& scores) {
    TokenScores out = scores;
    for (int b = 0; b < scores.batch; ++b) {
        auto first = out.data.begin() + static_cast<std::ptrdiff_t>(b) * scores.tokens;
        auto last = first + scores.tokens;
        const auto [lo, hi] = std::minmax_element(first, last);
        const double min = *lo;
        const double range = *hi - min;
        for (auto it = first; it != last; ++it) {
            *it = range > 0.0 ? (*it - min) / range : 1.0;
        }
    }
    return out;
}

TokenMask threshold_scores(const TokenScores& normalized, double tau) {
    TokenMask mask(normalized.batch, normalized.tokens, 0);
    for (size_t i = 0; i < normalized.data.size(); ++i) {
        mask.data[i] = normalized.data[i] >= tau ? 1 : 0;
    }
    return mask;
}

TokenMask sgtd_mask(const TokenScores& scores, double tau) { return threshold_scores(normalize_scores(scores), tau); }

TokenTensor sgtd_apply(const TokenTensor& x_m, const TokenMask& mask) {
    if (mask.batch != x_m.batch || mask.tokens != x_m.tokens) {
        throw ValidationError("sgtd_apply: mask is " + std::to_string(mask.batch) + "x" + std::to_string(mask.tokens) +
                              ", tokens are " + std::to_string(x_m.batch) + "x" + std::to_string(x_m.tokens));
    }
    TokenTensor out = x_m;
    for (int b = 0; b < x_m.batch; ++b) {
        for (int n = 0; n < x_m.tokens; ++n) {
            if (!mask.at(b, n)) {
                auto t = out.token(b, n);
                std::fill(t.begin(), t.end(), 0.0);
            }
        }
    }
    return out;
}

PromptBlock init_prompt_block(int channels, const CounterRng& rng) {
    PromptBlock p(channels);
    p.fuse_in = init_linear(2 * channels, channels, rng.substream(1));
    p.fuse_out = Linear(channels, channels);
    return p;
}

FeatureMap tokens_to_features(const TokenTensor& t) {
    FeatureMap f(t.batch, t.channels, t.grid_rows, t.grid_cols);
    for (int b = 0; b < t.batch; ++b) {
        for (int n = 0; n < t.tokens; ++n) {
            const int y = n / t.grid_cols;
            const int x = n % t.grid_cols;
            for (int c = 0; c < t.channels; ++c) {
                f.at(b, c, y, x) = t.at(b, n, c);
            }
        }
    }
    return f;
}

TokenTensor features_to_tokens(const FeatureMap& f) {
    TokenTensor t(f.batch, f.height, f.width, f.channels);
    for (int b = 0; b < f.batch; ++b) {
        for (int c = 0; c < f.channels; ++c) {
            for (int y = 0; y < f.height; ++y) {
                for (int x = 0; x < f.width; ++x) {
                    t.at(b, y * f.width + x, c) = f.at(b, c, y, x);
                }
            }
        }
    }
    return t;
}

namespace {

TokenTensor layer_norm_tokens(const TokenTensor& t, const LayerNorm& ln) {
    TokenTensor out = t;
    for (int b = 0; b < t.batch; ++b) {
        for (int n = 0; n < t.tokens; ++n) {
            ln.apply(t.token(b, n), out.token(b, n));
        }
    }
    return out;
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
    FeatureMap out(a.batch, a.channels + b.channels, a.height, a.width);
    const size_t plane = a.plane();
    for (int n = 0; n < a.batch; ++n) {
        std::copy_n(&a.data[a.index(n, 0, 0, 0)], plane * a.channels, &out.data[out.index(n, 0, 0, 0)]);
        std::copy_n(&b.data[b.index(n, 0, 0, 0)], plane * b.channels, &out.data[out.index(n, a.channels, 0, 0)]);
    }
    return out;
}

}  // namespace

TokenTensor sscp_fuse(const TokenTensor& h_m, const TokenTensor& x_s, const PromptBlock& block,
                      SscpActivations& act) {
    if (!h_m.same_shape(x_s)) {
        throw ValidationError("sscp_fuse: image and spectral tokens differ in shape");
    }
    if (block.fuse_in.in != 2 * h_m.channels || block.fuse_out.out != h_m.channels) {
        throw ValidationError("sscp_fuse: prompt block width does not match token channels");
    }
    const FeatureMap f_img = tokens_to_features(layer_norm_tokens(h_m, block.norm_img));
    const FeatureMap f_spec = tokens_to_features(layer_norm_tokens(x_s, block.norm_spec));
    act.concat = concat_channels(f_img, f_spec);
    act.pre_gelu = pointwise_conv(act.concat, block.fuse_in);
    act.hidden = act.pre_gelu;
    for (double& v : act.hidden.data) {
        v = gelu(v);
    }
    act.fused = pointwise_conv(act.hidden, block.fuse_out);

    const TokenTensor delta = features_to_tokens(act.fused);
    TokenTensor out = h_m;
    for (size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] += delta.data[i];
    }
    return out;
}

TokenTensor sscp_fuse(const TokenTensor& h_m, const TokenTensor& x_s, const PromptBlock& block) {
    SscpActivations act;
    return sscp_fuse(h_m, x_s, block, act);
}

}  // namespace hcod
