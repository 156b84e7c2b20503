#pragma once

#include <cmath>
#include <vector>

#include "textsr/attention/cross_attention.hpp"
#include "textsr/backbone/blocks.hpp"
#include "textsr/backbone/schedule.hpp"
#include "textsr/backbone/text_encoder.hpp"
#include "textsr/config.hpp"

namespace textsr {

// Deterministic convolutional image encoder (no sampling): 3 -> latent
// channels with log2(f) stride-2 stages.
template <typename T>
struct ImageEncoder {
    int factor = 4;
    ag::Var<T> in_w, in_b;
    struct Stage {
        ag::Var<T> gn_g, gn_b, w, b;
        int in_ch, out_ch;
    };
    std::vector<Stage> stages;
    ag::Var<T> out_gn_g, out_gn_b, out_w, out_b;
    int out_stage_ch = 0;

    ImageEncoder() = default;

    ImageEncoder(Rng& rng, const ModelConfig& cfg) : factor(cfg.downsample) {
        int base = cfg.base_channels;
        in_w = init::he_conv<T>(rng, base, 3, 3);
        in_b = init::zeros<T>({base});
        int n_stages = 0;
        for (int f = factor; f > 1; f /= 2) ++n_stages;
        int ch = base;
        for (int s = 0; s < n_stages; ++s) {
            Stage st;
            st.in_ch = ch;
            st.out_ch = s == 0 ? base * 2 : ch;
            st.gn_g = init::full<T>({ch}, 1.0);
            st.gn_b = init::zeros<T>({ch});
            st.w = init::he_conv<T>(rng, st.out_ch, ch, 3);
            st.b = init::zeros<T>({st.out_ch});
            ch = st.out_ch;
            stages.push_back(std::move(st));
        }
        out_stage_ch = ch;
        out_gn_g = init::full<T>({ch}, 1.0);
        out_gn_b = init::zeros<T>({ch});
        out_w = init::he_conv<T>(rng, cfg.latent_channels, ch, 3);
        out_b = init::zeros<T>({cfg.latent_channels});
    }

    ag::Var<T> forward(const ag::Var<T>& x) const {
        if (x->value.ndim() != 3 || x->value.dim(0) != 3)
            throw ShapeError("encode: need a {3,H,W} image");
        if (x->value.dim(1) % factor != 0 || x->value.dim(2) % factor != 0)
            throw ShapeError("encode: image dims must be divisible by the downsample factor");
        auto h = ag::conv2d(x, in_w, in_b, 1, 1);
        for (const auto& st : stages)
            h = ag::conv2d(ag::silu(ag::group_norm(h, st.gn_g, st.gn_b, gn_groups(st.in_ch))),
                           st.w, st.b, 2, 1);
        return ag::conv2d(ag::silu(ag::group_norm(h, out_gn_g, out_gn_b, gn_groups(out_stage_ch))),
                          out_w, out_b, 1, 1);
    }

    void visit(const std::string& p, const ParamVisitor<T>& v) const {
        v(p + ".in.w", in_w);
        v(p + ".in.b", in_b);
        for (size_t i = 0; i < stages.size(); ++i) {
            std::string q = p + ".down" + std::to_string(i);
            v(q + ".gn.g", stages[i].gn_g);
            v(q + ".gn.b", stages[i].gn_b);
            v(q + ".w", stages[i].w);
            v(q + ".b", stages[i].b);
        }
        v(p + ".out.gn.g", out_gn_g);
        v(p + ".out.gn.b", out_gn_b);
        v(p + ".out.w", out_w);
        v(p + ".out.b", out_b);
    }
};

template <typename T>
Tensor<T> time_sinusoid(int t, int dim) {
    Tensor<T> out({1, dim});
    int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        double f = std::exp(-std::log(10000.0) * i / std::max(1, half - 1));
        out[i] = static_cast<T>(std::sin(t * f));
        out[half + i] = static_cast<T>(std::cos(t * f));
    }
    return out;
}

// Noise-prediction U-Net with cross-attention layers whose raw score matrices
// are collected during the forward pass. Attention positions run down the
// resolutions, through the middle, and back up; the first M positions hold a
// layer. The final conv starts at zero so the initial noise estimate is zero.
template <typename T>
struct UNet {
    ModelConfig cfg;
    int temb_dim = 0;
    ag::Var<T> tm_w1, tm_b1, tm_w2, tm_b2;
    ag::Var<T> in_w, in_b;
    std::vector<ResBlock<T>> down_rb;          // one per resolution (last = middle)
    std::vector<ag::Var<T>> down_w, down_b;     // stride-2 convs between resolutions
    std::vector<ag::Var<T>> up_w, up_b;         // post-upsample convs
    std::vector<ResBlock<T>> up_rb;             // after skip concat
    std::vector<attn::CrossAttentionLayer<T>> ca; // M layers in position order
    ag::Var<T> out_gn_g, out_gn_b, out_w, out_b;

    UNet() = default;

    UNet(Rng& rng, const ModelConfig& c) : cfg(c) {
        int n = cfg.num_resolutions;
        int m = cfg.cross_attn_layers;
        if (n < 1) throw ParamError("unet: need at least one resolution");
        if (m < 1 || m > 2 * n - 1)
            throw ParamError("unet: cross_attn_layers must be in [1, 2*num_resolutions-1]");
        if (cfg.attn_heads != 1) throw ParamError("unet: single-head attention only");
        temb_dim = cfg.time_embed_dim * 2;
        tm_w1 = init::he_linear<T>(rng, temb_dim, cfg.time_embed_dim);
        tm_b1 = init::zeros<T>({temb_dim});
        tm_w2 = init::he_linear<T>(rng, temb_dim, temb_dim);
        tm_b2 = init::zeros<T>({temb_dim});

        auto ch = [&](int r) { return cfg.base_channels * (r + 1); };
        in_w = init::he_conv<T>(rng, ch(0), cfg.latent_channels, 3);
        in_b = init::zeros<T>({ch(0)});

        for (int r = 0; r < n; ++r) {
            down_rb.emplace_back(rng, ch(r), ch(r), temb_dim);
            if (position_has_ca(r))
                ca.emplace_back(rng, ch(r), cfg.text_embed_dim, cfg.attn_dim, cfg.lora_rank,
                                cfg.lora_scale);
            if (r < n - 1) {
                down_w.push_back(init::he_conv<T>(rng, ch(r + 1), ch(r), 3));
                down_b.push_back(init::zeros<T>({ch(r + 1)}));
            }
        }
        for (int r = n - 2; r >= 0; --r) {
            up_w.push_back(init::he_conv<T>(rng, ch(r), ch(r + 1), 3));
            up_b.push_back(init::zeros<T>({ch(r)}));
            up_rb.emplace_back(rng, 2 * ch(r), ch(r), temb_dim);
            int pos = 2 * n - 2 - r;
            if (position_has_ca(pos))
                ca.emplace_back(rng, ch(r), cfg.text_embed_dim, cfg.attn_dim, cfg.lora_rank,
                                cfg.lora_scale);
        }
        out_gn_g = init::full<T>({ch(0)}, 1.0);
        out_gn_b = init::zeros<T>({ch(0)});
        out_w = init::zeros<T>({cfg.latent_channels, ch(0), 3, 3});
        out_b = init::zeros<T>({cfg.latent_channels});
    }

    bool position_has_ca(int pos) const { return pos < cfg.cross_attn_layers; }

    // z {d,h,w}, prompt embedding cy {L,e} -> noise estimate and raw attention
    std::pair<ag::Var<T>, std::vector<attn::LayerScores<T>>> forward(
        const ag::Var<T>& z, int t, const ag::Var<T>& cy) const {
        int n = cfg.num_resolutions;
        int hh = z->value.dim(1), ww = z->value.dim(2);
        int need = 1 << (n - 1);
        if (hh % need != 0 || ww % need != 0)
            throw ShapeError("unet: latent dims must be divisible by 2^(num_resolutions-1)");

        auto temb_in = ag::constant(time_sinusoid<T>(t, cfg.time_embed_dim));
        auto temb = ag::linear(ag::silu(ag::linear(temb_in, tm_w1, tm_b1)), tm_w2, tm_b2);

        std::vector<attn::LayerScores<T>> scores;
        size_t ca_i = 0;
        auto h = ag::conv2d(z, in_w, in_b, 1, 1);
        std::vector<ag::Var<T>> skips;
        for (int r = 0; r < n; ++r) {
            h = down_rb[r].forward(h, temb);
            if (position_has_ca(r)) {
                auto [h2, sc] = ca[ca_i++].forward(h, cy);
                h = h2;
                scores.push_back(sc);
            }
            if (r < n - 1) {
                skips.push_back(h);
                h = ag::conv2d(h, down_w[r], down_b[r], 2, 1);
            }
        }
        for (int r = n - 2; r >= 0; --r) {
            int i = n - 2 - r;
            h = ag::conv2d(ag::upsample_nearest2(h), up_w[i], up_b[i], 1, 1);
            h = up_rb[i].forward(ag::concat_channels<T>({h, skips[r]}), temb);
            int pos = 2 * n - 2 - r;
            if (position_has_ca(pos)) {
                auto [h2, sc] = ca[ca_i++].forward(h, cy);
                h = h2;
                scores.push_back(sc);
            }
        }
        auto noise = ag::conv2d(
            ag::silu(ag::group_norm(h, out_gn_g, out_gn_b, gn_groups(cfg.base_channels))),
            out_w, out_b, 1, 1);
        return {noise, scores};
    }

    void visit(const std::string& p, const ParamVisitor<T>& v) const {
        v(p + ".time.w1", tm_w1);
        v(p + ".time.b1", tm_b1);
        v(p + ".time.w2", tm_w2);
        v(p + ".time.b2", tm_b2);
        v(p + ".in.w", in_w);
        v(p + ".in.b", in_b);
        for (size_t i = 0; i < down_rb.size(); ++i)
            down_rb[i].visit(p + ".down" + std::to_string(i) + ".rb", v);
        for (size_t i = 0; i < down_w.size(); ++i) {
            v(p + ".down" + std::to_string(i) + ".conv.w", down_w[i]);
            v(p + ".down" + std::to_string(i) + ".conv.b", down_b[i]);
        }
        for (size_t i = 0; i < up_w.size(); ++i) {
            std::string q = p + ".up" + std::to_string(i);
            v(q + ".conv.w", up_w[i]);
            v(q + ".conv.b", up_b[i]);
            up_rb[i].visit(q + ".rb", v);
        }
        for (size_t i = 0; i < ca.size(); ++i) ca[i].visit(p + ".ca" + std::to_string(i), v);
        v(p + ".out.gn.g", out_gn_g);
        v(p + ".out.gn.b", out_gn_b);
        v(p + ".out.w", out_w);
        v(p + ".out.b", out_b);
    }
};

} // namespace textsr
