#pragma once

#include <vector>

#include "textsr/backbone/unet.hpp"
#include "textsr/decoders/joint_decoder.hpp"

namespace textsr {

// The full one-step pipeline: encode the (pre-upsampled) degraded image,
// run the noise-prediction U-Net at the fixed time step, invert the forward
// form to get the clean-latent estimate, aggregate the "text" attention
// slices, and decode image and segmentation jointly.
template <typename T>
struct SrModel {
    ModelConfig cfg;
    Schedule sched;
    TextEncoder<T> text;
    ImageEncoder<T> encoder;
    UNet<T> unet;
    ag::Var<T> agg_w;     // {d_a, M, 1, 1} projection over stacked text slices
    ag::Var<T> seg_const; // {d_a} learned constant fed to the seg decoder when
                          // text-aware attention is disabled
    JointDecoder<T> decoder;

    SrModel() = default;

    SrModel(const ModelConfig& c, uint64_t seed) : cfg(c) {
        cfg.validate();
        sched = Schedule::make(cfg.schedule_steps, cfg.beta_min, cfg.beta_max);
        Rng rng(Rng::mix(seed, 0xabcdef12));
        text = TextEncoder<T>(rng, cfg.vocab, cfg.text_embed_dim);
        encoder = ImageEncoder<T>(rng, cfg);
        unet = UNet<T>(rng, cfg);
        agg_w = init::normal<T>(rng, {cfg.agg_channels, cfg.cross_attn_layers, 1, 1},
                                std::sqrt(1.0 / cfg.cross_attn_layers));
        seg_const = init::zeros<T>({cfg.agg_channels});
        decoder = JointDecoder<T>(rng, cfg);
    }

    struct Outputs {
        ag::Var<T> z_l;     // encoded input latent
        ag::Var<T> noise;   // U-Net estimate
        ag::Var<T> z_hat;   // denoised latent
        attn::AttnStack<T> attn;
        ag::Var<T> seg_input; // what the seg decoder consumed
        ag::Var<T> img;     // {3,H,W} in [0,1]
        ag::Var<T> seg;     // {1,H,W} in [0,1]
    };

    // x_up: degraded image already resampled to the target resolution
    Outputs forward(const Tensor<T>& x_up, bool use_taca = true) const {
        Outputs o;
        auto x = ag::constant(x_up);
        o.z_l = encoder.forward(x);
        auto prompt = text.embed_prompt(cfg.prompt);
        auto [noise, scores] = unet.forward(o.z_l, cfg.t_fixed, prompt.embeddings);
        o.noise = noise;
        o.z_hat = invert_forward(o.z_l, o.noise, cfg.t_fixed, sched);

        o.attn.per_layer = scores;
        for (const auto& sc : scores)
            o.attn.tex_maps.push_back(
                attn::search_text_slice(sc.raw, prompt.tex_index, sc.h, sc.w));
        int lh = o.z_hat->value.dim(1), lw = o.z_hat->value.dim(2);
        o.attn.aggregated = attn::aggregate_attention(o.attn.tex_maps, lh, lw, agg_w);

        o.seg_input = use_taca ? o.attn.aggregated : ag::broadcast_chw(seg_const, lh, lw);
        auto [img, seg] = decoder.forward(o.z_hat, o.seg_input);
        o.img = img;
        o.seg = seg;
        return o;
    }

    void visit_params(const ParamVisitor<T>& v) const {
        text.visit("text", v);
        encoder.visit("encoder", v);
        unet.visit("unet", v);
        v("attn_agg.w", agg_w);
        v("seg_const", seg_const);
        decoder.visit("decoder", v);
    }

    std::vector<ag::Var<T>> params() const {
        std::vector<ag::Var<T>> out;
        visit_params([&](const std::string&, const ag::Var<T>& p) { out.push_back(p); });
        return out;
    }

    // every residual scale of the interaction blocks (frozen when the joint
    // decoding ablation is off)
    std::vector<ag::Var<T>> cdib_scales() const {
        std::vector<ag::Var<T>> out;
        for (const auto& b : decoder.blocks) {
            out.push_back(b.img.res_scale);
            out.push_back(b.seg.res_scale);
        }
        return out;
    }
};

} // namespace textsr
