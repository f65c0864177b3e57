#include "hcod/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "hcod/errors.hpp"
#include "hcod/losses.hpp"

namespace hcod {

namespace {

constexpr uint64_t kFdeSeedSalt = 0x5eedfde;

const PromptBlock* final_prompt(const Model& model, const SegmentConfig& cfg) {
    const int last = cfg.encoder.depth - 1;
    return cfg.encoder.prompts_after(last) ? &model.encoder.prompts[static_cast<size_t>(last)] : nullptr;
}

}  // namespace

std::vector<ParamRef> Model::parameters() {
    std::vector<ParamRef> out = encoder.parameters();
    for (auto& p : fde.parameters()) {
        out.push_back(p);
    }
    return out;
}

Model init_model(const SegmentConfig& cfg) {
    Model m;
    m.encoder = init_encoder(cfg.encoder);
    m.fde = init_fde(cfg.encoder.seed ^ kFdeSeedSalt);
    return m;
}

Decomposition decompose(const HsiCube& cube, const SegmentConfig& cfg) {
    return {map_to_ciexyz(cube, cie1931_2deg(), cfg.xyz_bands), spectral_saliency(cube, cfg.pyramid)};
}

SegmentResult segment(const Decomposition& d, const SegmentConfig& cfg, const Model& model) {
    const EncoderOutput enc = encoder_forward(d.xyz.normalized, d.saliency, cfg.encoder, model.encoder, cfg.forward);
    SegmentResult r;
    r.s_f = decode_mask(enc.tokens, model.encoder.decode, cfg.encoder.patch_size);
    if (cfg.fde_enabled) {
        r.s_d = enhance(r.s_f, extract_features(d.xyz.normalized, model.fde), model.fde);
    }
    r.mask = enc.mask;
    r.kept_fraction = enc.mask.kept_fraction();
    return r;
}

SegmentResult segment(const HsiCube& cube, const SegmentConfig& cfg, const Model& model) {
    return segment(decompose(cube, cfg), cfg, model);
}

HeadCache make_head_cache(const Decomposition& d, const Mask& gt, const SegmentConfig& cfg, const Model& model) {
    gt.validate();
    if (gt.height != d.xyz.normalized.height || gt.width != d.xyz.normalized.width) {
        throw ValidationError("make_head_cache: ground truth does not match the cube size");
    }
    ForwardTrace trace;
    EncoderOutput enc =
        encoder_forward(d.xyz.normalized, d.saliency, cfg.encoder, model.encoder, cfg.forward, &trace);
    HeadCache c;
    c.has_final_prompt = trace.final_prompt_applied;
    c.pre_final = c.has_final_prompt ? std::move(trace.pre_final_prompt) : std::move(enc.tokens);
    c.spectral = std::move(enc.spectral_tokens);
    c.detail = detail_residual(extract_features(d.xyz.normalized, model.fde), model.fde);
    c.gt = gt;
    return c;
}

std::vector<ParamRef> trainable_parameters(Model& model, const SegmentConfig& cfg) {
    Linear& dec = model.encoder.decode;
    std::vector<ParamRef> out{{"decode.weight", {dec.out, dec.in}, &dec.weight},
                              {"decode.bias", {dec.out}, &dec.bias}};
    if (final_prompt(model, cfg)) {
        PromptBlock& p = model.encoder.prompts[static_cast<size_t>(cfg.encoder.depth - 1)];
        const std::string name = "prompts." + std::to_string(cfg.encoder.depth - 1);
        out.push_back({name + ".fuse_in.weight", {p.fuse_in.out, p.fuse_in.in}, &p.fuse_in.weight});
        out.push_back({name + ".fuse_in.bias", {p.fuse_in.out}, &p.fuse_in.bias});
        out.push_back({name + ".fuse_out.weight", {p.fuse_out.out, p.fuse_out.in}, &p.fuse_out.weight});
        out.push_back({name + ".fuse_out.bias", {p.fuse_out.out}, &p.fuse_out.bias});
    }
    return out;
}

double head_loss(const Model& model, const SegmentConfig& cfg, const HeadCache& cache,
                 std::vector<std::vector<double>>* grads) {
    const PromptBlock* prompt = cache.has_final_prompt ? final_prompt(model, cfg) : nullptr;
    if (cache.has_final_prompt && !prompt) {
        throw ValidationError("head_loss: cache was built with a final prompt the configuration lacks");
    }
    const Linear& dec = model.encoder.decode;
    const int p = cfg.encoder.patch_size;

    SscpActivations act;
    const TokenTensor z = prompt ? sscp_fuse(cache.pre_final, cache.spectral, *prompt, act) : cache.pre_final;
    const SaliencyMap logits = decode_logits(z, dec, p);
    SaliencyMap s_f = logits;
    for (double& v : s_f.data) {
        v = sigmoid(std::clamp(v, -kLogitClamp, kLogitClamp));
    }
    const SaliencyMap s_d = apply_residual(s_f, cache.detail);
    const LossReport rep = total_loss(s_d, s_f, cache.gt);
    if (!grads) {
        return rep.total;
    }

    // d total / d logit; S_d passes gradient only where the clamp is inactive.
    Image dlogit(s_f.height, s_f.width, 1);
    for (size_t i = 0; i < s_f.data.size(); ++i) {
        const double sd_raw = s_f.data[i] + cache.detail.data[i];
        double g = rep.grad_final.data[i];
        if (sd_raw > 0.0 && sd_raw < 1.0) {
            g += rep.grad_dec.data[i];
        }
        const double s = s_f.data[i];
        dlogit.data[i] = std::abs(logits.data[i]) < kLogitClamp ? g * s * (1.0 - s) : 0.0;
    }

    grads->assign(prompt ? 6 : 2, {});
    auto& g_dw = (*grads)[0];
    auto& g_db = (*grads)[1];
    g_dw.assign(dec.weight.size(), 0.0);
    g_db.assign(dec.bias.size(), 0.0);
    TokenTensor dz(1, z.grid_rows, z.grid_cols, z.channels);
    for (int n = 0; n < z.tokens; ++n) {
        const int gr = n / z.grid_cols;
        const int gc = n % z.grid_cols;
        const auto zn = z.token(0, n);
        auto dzn = dz.token(0, n);
        for (int k = 0; k < dec.out; ++k) {
            const double dl = dlogit.at(gr * p + k / p, gc * p + k % p);
            if (dl == 0.0) {
                continue;
            }
            g_db[static_cast<size_t>(k)] += dl;
            for (int c = 0; c < dec.in; ++c) {
                g_dw[static_cast<size_t>(k) * dec.in + c] += dl * zn[c];
                dzn[c] += dec.w(k, c) * dl;
            }
        }
    }
    if (!prompt) {
        return rep.total;
    }

    // z = h + fuse_out(gelu(fuse_in(concat))); h and concat are frozen.
    const Linear& fin = prompt->fuse_in;
    const Linear& fout = prompt->fuse_out;
    auto& g_in_w = (*grads)[2];
    auto& g_in_b = (*grads)[3];
    auto& g_out_w = (*grads)[4];
    auto& g_out_b = (*grads)[5];
    g_in_w.assign(fin.weight.size(), 0.0);
    g_in_b.assign(fin.bias.size(), 0.0);
    g_out_w.assign(fout.weight.size(), 0.0);
    g_out_b.assign(fout.bias.size(), 0.0);
    std::vector<double> dpre(static_cast<size_t>(fin.out));
    for (int n = 0; n < z.tokens; ++n) {
        const int y = n / z.grid_cols;
        const int x = n % z.grid_cols;
        const auto dzn = dz.token(0, n);
        std::fill(dpre.begin(), dpre.end(), 0.0);
        for (int o = 0; o < fout.out; ++o) {
            const double d = dzn[o];
            if (d == 0.0) {
                continue;
            }
            g_out_b[static_cast<size_t>(o)] += d;
            for (int i = 0; i < fout.in; ++i) {
                g_out_w[static_cast<size_t>(o) * fout.in + i] += d * act.hidden.at(0, i, y, x);
                dpre[static_cast<size_t>(i)] += fout.w(o, i) * d;
            }
        }
        for (int o = 0; o < fin.out; ++o) {
            const double d = dpre[static_cast<size_t>(o)] * gelu_grad(act.pre_gelu.at(0, o, y, x));
            if (d == 0.0) {
                continue;
            }
            g_in_b[static_cast<size_t>(o)] += d;
            for (int i = 0; i < fin.in; ++i) {
                g_in_w[static_cast<size_t>(o) * fin.in + i] += d * act.concat.at(0, i, y, x);
            }
        }
    }
    return rep.total;
}

std::vector<double> train_head(Model& model, const SegmentConfig& cfg, const std::vector<HeadCache>& caches,
                               const TrainConfig& train) {
    if (caches.empty()) {
        throw ValidationError("train_head: no training scenes");
    }
    if (train.steps < 0 || !(train.learning_rate > 0.0)) {
        throw ValidationError("train_head: steps must be >= 0 and learning rate > 0");
    }
    const std::vector<ParamRef> params = trainable_parameters(model, cfg);
    std::vector<double> history;
    history.reserve(static_cast<size_t>(train.steps));
    std::vector<std::vector<double>> sum;
    std::vector<std::vector<double>> g;
    const double inv = 1.0 / static_cast<double>(caches.size());
    for (int step = 0; step < train.steps; ++step) {
        double loss = 0.0;
        sum.assign(params.size(), {});
        for (size_t k = 0; k < params.size(); ++k) {
            sum[k].assign(params[k].values->size(), 0.0);
        }
        for (const auto& c : caches) {
            loss += head_loss(model, cfg, c, &g);
            for (size_t k = 0; k < g.size(); ++k) {
                for (size_t i = 0; i < g[k].size(); ++i) {
                    sum[k][i] += g[k][i];
                }
            }
        }
        history.push_back(loss * inv);
        for (size_t k = 0; k < params.size(); ++k) {
            auto& v = *params[k].values;
            for (size_t i = 0; i < v.size(); ++i) {
                v[i] -= train.learning_rate * inv * sum[k][i];
            }
        }
    }
    return history;
}

}  // namespace hcod
