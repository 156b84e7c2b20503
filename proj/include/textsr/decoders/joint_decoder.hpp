#pragma once

#include <utility>
#include <vector>

#include "textsr/config.hpp"
#include "textsr/decoders/cdib.hpp"

namespace textsr {

// One decoding pathway: in conv, then per level ResBlock -> (x2 upsample) ->
// conv, finishing with GN/SiLU/conv/sigmoid into the output channels.
template <typename T>
struct DecoderStream {
    int in_ch = 0, out_ch = 0;
    ag::Var<T> in_w, in_b;
    std::vector<ResBlock<T>> rbs;
    std::vector<ag::Var<T>> lvl_w, lvl_b;
    std::vector<int> up_factor;
    ag::Var<T> head_gn_g, head_gn_b, head_w, head_b;

    DecoderStream() = default;

    DecoderStream(Rng& rng, int in_channels, int out_channels,
                  const std::vector<int>& widths, const std::vector<int>& factors)
        : in_ch(in_channels), out_ch(out_channels), up_factor(factors) {
        in_w = init::he_conv<T>(rng, widths[0], in_channels, 3);
        in_b = init::zeros<T>({widths[0]});
        for (size_t i = 1; i < widths.size(); ++i) {
            rbs.emplace_back(rng, widths[i - 1], widths[i - 1], 0);
            lvl_w.push_back(init::he_conv<T>(rng, widths[i], widths[i - 1], 3));
            lvl_b.push_back(init::zeros<T>({widths[i]}));
        }
        int last = widths.back();
        head_gn_g = init::full<T>({last}, 1.0);
        head_gn_b = init::zeros<T>({last});
        head_w = init::he_conv<T>(rng, out_channels, last, 3);
        head_b = init::zeros<T>({out_channels});
    }

    ag::Var<T> enter(const ag::Var<T>& x) const { return ag::conv2d(x, in_w, in_b, 1, 1); }

    ag::Var<T> level(const ag::Var<T>& x, size_t i) const {
        auto h = rbs[i].forward(x);
        if (up_factor[i] == 2) h = ag::upsample_nearest2(h);
        return ag::conv2d(h, lvl_w[i], lvl_b[i], 1, 1);
    }

    ag::Var<T> head(const ag::Var<T>& x) const {
        auto h = ag::conv2d(
            ag::silu(ag::group_norm(x, head_gn_g, head_gn_b, gn_groups(x->value.dim(0)))),
            head_w, head_b, 1, 1);
        return ag::sigmoid(h);
    }

    void visit(const std::string& p, const ParamVisitor<T>& v) const {
        v(p + ".in.w", in_w);
        v(p + ".in.b", in_b);
        for (size_t i = 0; i < rbs.size(); ++i) {
            std::string q = p + ".lvl" + std::to_string(i);
            rbs[i].visit(q + ".rb", v);
            v(q + ".conv.w", lvl_w[i]);
            v(q + ".conv.b", lvl_b[i]);
        }
        v(p + ".head.gn.g", head_gn_g);
        v(p + ".head.gn.b", head_gn_b);
        v(p + ".head.w", head_w);
        v(p + ".head.b", head_b);
    }
};

// The paired image decoder and text-segmentation decoder. Both streams mirror
// each other level by level and exchange features through a cross-decoder
// interaction block after every level.
template <typename T>
struct JointDecoder {
    DecoderStream<T> img, seg;
    std::vector<CrossDecoderBlock<T>> blocks;
    int levels = 0;

    JointDecoder() = default;

    JointDecoder(Rng& rng, const ModelConfig& cfg) {
        const auto& widths = cfg.decoder_channels;
        if (widths.size() < 2) throw ParamError("decoder: need at least one level");
        levels = static_cast<int>(widths.size()) - 1;
        int ups_needed = 0;
        for (int f = cfg.downsample; f > 1; f /= 2) ++ups_needed;
        if (ups_needed > levels)
            throw ParamError("decoder: not enough levels to reach the image resolution");
        std::vector<int> factors(levels, 1);
        for (int i = 0; i < ups_needed; ++i) factors[i] = 2;

        img = DecoderStream<T>(rng, cfg.latent_channels, 3, widths, factors);
        seg = DecoderStream<T>(rng, cfg.agg_channels, 1, widths, factors);
        for (int i = 1; i <= levels; ++i)
            blocks.emplace_back(rng, widths[i], cfg.lora_rank, cfg.lora_scale);
    }

    // z_hat {d,h,w}, a_tex {d_a,h,w} -> (image {3,H,W}, mask {1,H,W})
    std::pair<ag::Var<T>, ag::Var<T>> forward(const ag::Var<T>& z_hat,
                                              const ag::Var<T>& a_tex) const {
        if (z_hat->value.dim(1) != a_tex->value.dim(1) ||
            z_hat->value.dim(2) != a_tex->value.dim(2))
            throw ShapeError("decode: latent and attention spatial dims differ");
        auto z = img.enter(z_hat);
        auto a = seg.enter(a_tex);
        for (int i = 0; i < levels; ++i) {
            z = img.level(z, i);
            a = seg.level(a, i);
            auto [z2, a2] = blocks[i].forward(z, a);
            z = z2;
            a = a2;
        }
        return {img.head(z), seg.head(a)};
    }

    void visit(const std::string& p, const ParamVisitor<T>& v) const {
        img.visit(p + ".img", v);
        seg.visit(p + ".seg", v);
        for (size_t i = 0; i < blocks.size(); ++i)
            blocks[i].visit(p + ".cdib" + std::to_string(i), v);
    }
};

} // namespace textsr
