#include "hcod/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hcod/errors.hpp"

namespace hcod {

namespace {

enum Stream : uint64_t { kEmbedImg = 1, kEmbedSpec = 2, kBlocks = 100, kPrompts = 1000, kDecode = 2000 };

void add_linear(std::vector<ParamRef>& out, const std::string& name, Linear& l) {
    out.push_back({name + ".weight", {l.out, l.in}, &l.weight});
    out.push_back({name + ".bias", {l.out}, &l.bias});
}

void add_norm(std::vector<ParamRef>& out, const std::string& name, LayerNorm& n) {
    out.push_back({name + ".gamma", {static_cast<int>(n.gamma.size())}, &n.gamma});
    out.push_back({name + ".beta", {static_cast<int>(n.beta.size())}, &n.beta});
}

}  // namespace

std::vector<ParamRef> EncoderWeights::parameters() {
    std::vector<ParamRef> out;
    add_linear(out, "embed_img", embed_img);
    add_linear(out, "embed_spec", embed_spec);
    for (size_t i = 0; i < blocks.size(); ++i) {
        const std::string p = "blocks." + std::to_string(i);
        add_norm(out, p + ".norm_attn", blocks[i].norm_attn);
        add_linear(out, p + ".qkv", blocks[i].qkv);
        add_linear(out, p + ".attn_out", blocks[i].attn_out);
        add_norm(out, p + ".norm_mlp", blocks[i].norm_mlp);
        add_linear(out, p + ".mlp_in", blocks[i].mlp_in);
        add_linear(out, p + ".mlp_out", blocks[i].mlp_out);
    }
    for (size_t i = 0; i < prompts.size(); ++i) {
        const std::string p = "prompts." + std::to_string(i);
        add_norm(out, p + ".norm_img", prompts[i].norm_img);
        add_norm(out, p + ".norm_spec", prompts[i].norm_spec);
        add_linear(out, p + ".fuse_in", prompts[i].fuse_in);
        add_linear(out, p + ".fuse_out", prompts[i].fuse_out);
    }
    add_linear(out, "decode", decode);
    return out;
}

EncoderWeights init_encoder(const EncoderConfig& cfg, int image_channels, int prompt_channels) {
    cfg.validate();
    const CounterRng root(cfg.seed);
    const int c = cfg.channels;
    const int p2 = cfg.patch_size * cfg.patch_size;

    EncoderWeights w;
    w.patch_size = cfg.patch_size;
    w.channels = c;
    w.heads = cfg.heads;
    w.embed_img = init_linear(p2 * image_channels, c, root.substream(kEmbedImg));

    w.embed_spec = Linear(p2 * prompt_channels, c);
    const CounterRng spec_rng = root.substream(kEmbedSpec);
    const double a = std::sqrt(3.0 / w.embed_spec.in);
    for (size_t i = 0; i < w.embed_spec.weight.size(); ++i) {
        w.embed_spec.weight[i] = spec_rng.uniform(i, 0.0, a);
    }

    for (int i = 0; i < cfg.depth; ++i) {
        const CounterRng r = root.substream(kBlocks + 10 * static_cast<uint64_t>(i));
        EncoderBlock b{LayerNorm(c),
                       init_linear(c, 3 * c, r.substream(1)),
                       init_linear(c, c, r.substream(2), 0.5),
                       LayerNorm(c),
                       init_linear(c, 2 * c, r.substream(3)),
                       init_linear(2 * c, c, r.substream(4), 0.5)};
        w.blocks.push_back(std::move(b));
        w.prompts.push_back(init_prompt_block(c, root.substream(kPrompts + static_cast<uint64_t>(i))));
    }
    w.decode = init_linear(c, p2, root.substream(kDecode), 0.1);
    return w;
}

TokenTensor encoder_block_forward(const TokenTensor& h, const EncoderBlock& block, int heads,
                                  const TokenMask* key_mask, std::vector<double>* attention) {
    const int n_tok = h.tokens;
    const int c = h.channels;
    const int dh = c / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    TokenTensor out = h;
    if (attention) {
        attention->assign(static_cast<size_t>(h.batch) * heads * n_tok * n_tok, 0.0);
    }

    std::vector<double> normed(static_cast<size_t>(c));
    std::vector<double> qkv(static_cast<size_t>(n_tok) * 3 * c);
    std::vector<double> ctx(static_cast<size_t>(n_tok) * c);
    std::vector<double> logits(static_cast<size_t>(n_tok));
    std::vector<double> delta(static_cast<size_t>(c));
    std::vector<double> hidden(static_cast<size_t>(block.mlp_in.out));

    for (int b = 0; b < h.batch; ++b) {
        for (int n = 0; n < n_tok; ++n) {
            block.norm_attn.apply(h.token(b, n), normed);
            block.qkv.apply(normed, {qkv.data() + static_cast<size_t>(n) * 3 * c, static_cast<size_t>(3 * c)});
        }
        std::fill(ctx.begin(), ctx.end(), 0.0);
        for (int hd = 0; hd < heads; ++hd) {
            for (int i = 0; i < n_tok; ++i) {
                const double* q = &qkv[static_cast<size_t>(i) * 3 * c + hd * dh];
                double peak = -std::numeric_limits<double>::infinity();
                for (int j = 0; j < n_tok; ++j) {
                    if (key_mask && !key_mask->at(b, j)) {
                        logits[j] = -std::numeric_limits<double>::infinity();
                        continue;
                    }
                    const double* k = &qkv[static_cast<size_t>(j) * 3 * c + c + hd * dh];
                    double s = 0.0;
                    for (int d = 0; d < dh; ++d) {
                        s += q[d] * k[d];
                    }
                    logits[j] = s * scale;
                    peak = std::max(peak, logits[j]);
                }
                if (peak == -std::numeric_limits<double>::infinity()) {
                    continue;  // every key excluded: empty context
                }
                double denom = 0.0;
                for (int j = 0; j < n_tok; ++j) {
                    logits[j] = std::exp(logits[j] - peak);
                    denom += logits[j];
                }
                double* dst = &ctx[static_cast<size_t>(i) * c + hd * dh];
                for (int j = 0; j < n_tok; ++j) {
                    const double pr = logits[j] / denom;
                    if (attention) {
                        (*attention)[((static_cast<size_t>(b) * heads + hd) * n_tok + i) * n_tok + j] = pr;
                    }
                    if (pr == 0.0) {
                        continue;
                    }
                    const double* v = &qkv[static_cast<size_t>(j) * 3 * c + 2 * c + hd * dh];
                    for (int d = 0; d < dh; ++d) {
                        dst[d] += pr * v[d];
                    }
                }
            }
        }
        for (int n = 0; n < n_tok; ++n) {
            block.attn_out.apply({ctx.data() + static_cast<size_t>(n) * c, static_cast<size_t>(c)}, delta);
            auto t = out.token(b, n);
            for (int k = 0; k < c; ++k) {
                t[k] += delta[k];
            }
            block.norm_mlp.apply(t, normed);
            block.mlp_in.apply(normed, hidden);
            for (double& v : hidden) {
                v = gelu(v);
            }
            block.mlp_out.apply(hidden, delta);
            for (int k = 0; k < c; ++k) {
                t[k] += delta[k];
            }
        }
    }
    return out;
}

namespace {

// Runs a block on the kept tokens only; dropped positions come back as zeros.
TokenTensor block_forward_removed(const TokenTensor& h, const EncoderBlock& block, int heads, const TokenMask& mask,
                                  std::vector<double>* attention) {
    TokenTensor out(h.batch, h.grid_rows, h.grid_cols, h.channels);
    if (attention) {
        attention->clear();
    }
    for (int b = 0; b < h.batch; ++b) {
        std::vector<int> kept;
        for (int n = 0; n < h.tokens; ++n) {
            if (mask.at(b, n)) {
                kept.push_back(n);
            }
        }
        if (kept.empty()) {
            continue;
        }
        TokenTensor compact(1, 1, static_cast<int>(kept.size()), h.channels);
        for (size_t k = 0; k < kept.size(); ++k) {
            std::copy_n(h.token(b, kept[k]).data(), h.channels, compact.token(0, static_cast<int>(k)).data());
        }
        std::vector<double> attn;
        const TokenTensor res = encoder_block_forward(compact, block, heads, nullptr, attention ? &attn : nullptr);
        if (attention) {
            attention->insert(attention->end(), attn.begin(), attn.end());
        }
        for (size_t k = 0; k < kept.size(); ++k) {
            std::copy_n(res.token(0, static_cast<int>(k)).data(), h.channels, out.token(b, kept[k]).data());
        }
    }
    return out;
}

}  // namespace

EncoderOutput encoder_forward(const Image& i_m, const Image& i_s, const EncoderConfig& cfg,
                              const EncoderWeights& weights, const ForwardOptions& opts, ForwardTrace* trace) {
    cfg.validate();
    if (weights.channels != cfg.channels || weights.patch_size != cfg.patch_size || weights.heads != cfg.heads ||
        static_cast<int>(weights.blocks.size()) != cfg.depth) {
        throw ValidationError("encoder_forward: weights were built for a different configuration");
    }
    if (i_m.height != i_s.height || i_m.width != i_s.width) {
        throw ValidationError("encoder_forward: spatial image and spectral prompt differ in size");
    }

    EncoderOutput out;
    const TokenTensor x_m = patchify(i_m, weights.embed_img, cfg.patch_size);
    out.spectral_tokens = patchify(i_s, weights.embed_spec, cfg.patch_size);
    out.scores = sgtd_score(out.spectral_tokens);
    out.mask = sgtd_mask(out.scores, cfg.sgtd_tau);

    if (trace) {
        trace->attention.clear();
        trace->final_prompt_applied = false;
    }
    TokenTensor h = x_m;
    for (int i = 0; i < cfg.depth; ++i) {
        h = sgtd_apply(h, out.mask);
        std::vector<double>* attn = nullptr;
        if (trace) {
            trace->attention.emplace_back();
            attn = &trace->attention.back();
        }
        const auto& block = weights.blocks[static_cast<size_t>(i)];
        if (opts.mode == DropMode::Remove) {
            h = block_forward_removed(h, block, cfg.heads, out.mask, attn);
        } else {
            h = encoder_block_forward(h, block, cfg.heads, opts.exclude_dropped_keys ? &out.mask : nullptr, attn);
        }
        if (cfg.prompts_after(i)) {
            if (trace && i == cfg.depth - 1) {
                trace->pre_final_prompt = h;
                trace->final_prompt_applied = true;
            }
            h = sscp_fuse(h, out.spectral_tokens, weights.prompts[static_cast<size_t>(i)]);
        }
    }
    out.tokens = std::move(h);
    return out;
}

SaliencyMap decode_logits(const TokenTensor& tokens, const Linear& head, int patch, int batch_index) {
    if (head.in != tokens.channels || head.out != patch * patch) {
        throw ValidationError("decode: head shape does not match tokens/patch size");
    }
    if (batch_index < 0 || batch_index >= tokens.batch) {
        throw ValidationError("decode: batch index out of range");
    }
    SaliencyMap out(tokens.grid_rows * patch, tokens.grid_cols * patch, 1);
    std::vector<double> logits(static_cast<size_t>(head.out));
    for (int n = 0; n < tokens.tokens; ++n) {
        head.apply(tokens.token(batch_index, n), logits);
        const int gr = n / tokens.grid_cols;
        const int gc = n % tokens.grid_cols;
        for (int dy = 0; dy < patch; ++dy) {
            for (int dx = 0; dx < patch; ++dx) {
                out.at(gr * patch + dy, gc * patch + dx) = logits[static_cast<size_t>(dy * patch + dx)];
            }
        }
    }
    return out;
}

SaliencyMap decode_mask(const TokenTensor& tokens, const Linear& head, int patch, int batch_index) {
    SaliencyMap out = decode_logits(tokens, head, patch, batch_index);
    for (double& v : out.data) {
        v = sigmoid(std::clamp(v, -kLogitClamp, kLogitClamp));
    }
    return out;
}

}  // namespace hcod
