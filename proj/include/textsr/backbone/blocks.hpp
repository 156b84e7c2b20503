#pragma once

#include "textsr/backbone/init.hpp"
#include "textsr/core/ops.hpp"

namespace textsr {

// Pre-activation residual block: (GN -> SiLU -> 3x3 conv) twice plus skip.
// An optional time-embedding projection is added channelwise after the first conv.
template <typename T>
struct ResBlock {
    int in_ch = 0, out_ch = 0;
    ag::Var<T> gn1_g, gn1_b, conv1_w, conv1_b;
    ag::Var<T> gn2_g, gn2_b, conv2_w, conv2_b;
    ag::Var<T> temb_w, temb_b; // {out, tdim}, null when no time conditioning
    ag::Var<T> skip_w, skip_b; // 1x1 when in != out

    ResBlock() = default;

    ResBlock(Rng& rng, int in, int out, int temb_dim) : in_ch(in), out_ch(out) {
        gn1_g = init::full<T>({in}, 1.0);
        gn1_b = init::zeros<T>({in});
        conv1_w = init::he_conv<T>(rng, out, in, 3);
        conv1_b = init::zeros<T>({out});
        gn2_g = init::full<T>({out}, 1.0);
        gn2_b = init::zeros<T>({out});
        conv2_w = init::he_conv<T>(rng, out, out, 3);
        conv2_b = init::zeros<T>({out});
        if (temb_dim > 0) {
            temb_w = init::he_linear<T>(rng, out, temb_dim);
            temb_b = init::zeros<T>({out});
        }
        if (in != out) {
            skip_w = init::normal<T>(rng, {out, in, 1, 1}, std::sqrt(1.0 / in));
            skip_b = init::zeros<T>({out});
        }
    }

    // temb: {1, tdim} row or null
    ag::Var<T> forward(const ag::Var<T>& x, const ag::Var<T>& temb = {}) const {
        auto h = ag::conv2d(ag::silu(ag::group_norm(x, gn1_g, gn1_b, gn_groups(in_ch))),
                            conv1_w, conv1_b, 1, 1);
        if (temb_w && temb) {
            auto tvec = ag::reshape(ag::linear(temb, temb_w, temb_b), {out_ch});
            h = ag::add(h, ag::broadcast_chw(tvec, h->value.dim(1), h->value.dim(2)));
        }
        h = ag::conv2d(ag::silu(ag::group_norm(h, gn2_g, gn2_b, gn_groups(out_ch))),
                       conv2_w, conv2_b, 1, 1);
        auto s = skip_w ? ag::conv2d(x, skip_w, skip_b, 1, 0) : x;
        return ag::add(h, s);
    }

    void visit(const std::string& p, const ParamVisitor<T>& v) const {
        v(p + ".gn1.g", gn1_g);
        v(p + ".gn1.b", gn1_b);
        v(p + ".conv1.w", conv1_w);
        v(p + ".conv1.b", conv1_b);
        v(p + ".gn2.g", gn2_g);
        v(p + ".gn2.b", gn2_b);
        v(p + ".conv2.w", conv2_w);
        v(p + ".conv2.b", conv2_b);
        if (temb_w) {
            v(p + ".temb.w", temb_w);
            v(p + ".temb.b", temb_b);
        }
        if (skip_w) {
            v(p + ".skip.w", skip_w);
            v(p + ".skip.b", skip_b);
        }
    }
};

} // namespace textsr
