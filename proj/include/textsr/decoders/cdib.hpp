#pragma once

#include <utility>

#include "textsr/backbone/blocks.hpp"
#include "textsr/backbone/lora.hpp"

namespace textsr {

// One branch of a cross-decoder interaction block. Per branch: two ResBlocks,
// a 1x1 conv whose output splits into a kept half and a half sent to the other
// branch; the received half gates the kept half through a sigmoid; then
// GroupNorm -> SiLU -> 1x1 conv back to full width. The branch result joins
// the input through a residual scale that starts at zero, so a fresh block is
// an exact identity.
template <typename T>
struct CdibBranch {
    ResBlock<T> rb1, rb2;
    LoraConv1x1<T> pre;  // C -> C, then split
    ag::Var<T> gn_g, gn_b;
    LoraConv1x1<T> post; // C/2 -> C
    ag::Var<T> res_scale; // {1}, zero at creation

    CdibBranch() = default;

    CdibBranch(Rng& rng, int ch, int rank, double scale)
        : rb1(rng, ch, ch, 0), rb2(rng, ch, ch, 0) {
        pre = LoraConv1x1<T>(rng, ch, ch, rank, scale);
        gn_g = init::full<T>({ch / 2}, 1.0);
        gn_b = init::zeros<T>({ch / 2});
        post = LoraConv1x1<T>(rng, ch, ch / 2, rank, scale);
        res_scale = init::zeros<T>({1});
    }

    // kept/sent halves of the branch's pre-exchange features
    std::pair<ag::Var<T>, ag::Var<T>> split_halves(const ag::Var<T>& x) const {
        auto h = pre.forward(rb2.forward(rb1.forward(x)));
        int c = h->value.dim(0);
        return {ag::slice_channels(h, 0, c / 2), ag::slice_channels(h, c / 2, c)};
    }

    ag::Var<T> finish(const ag::Var<T>& input, const ag::Var<T>& kept,
                      const ag::Var<T>& received) const {
        auto gated = ag::mul(kept, ag::sigmoid(received));
        auto r = post.forward(
            ag::silu(ag::group_norm(gated, gn_g, gn_b, gn_groups(gated->value.dim(0)))));
        return ag::add(input, ag::scale_by(r, res_scale));
    }

    void visit(const std::string& p, const ParamVisitor<T>& v) const {
        rb1.visit(p + ".rb1", v);
        rb2.visit(p + ".rb2", v);
        pre.visit(p + ".pre", v);
        v(p + ".gn.g", gn_g);
        v(p + ".gn.b", gn_b);
        post.visit(p + ".post", v);
        v(p + ".res_scale", res_scale);
    }
};

template <typename T>
struct CrossDecoderBlock {
    CdibBranch<T> img, seg;

    CrossDecoderBlock() = default;

    CrossDecoderBlock(Rng& rng, int ch, int rank, double scale) {
        if (ch % 2 != 0) throw ShapeError("cdib: channel count must be even to split");
        img = CdibBranch<T>(rng, ch, rank, scale);
        seg = CdibBranch<T>(rng, ch, rank, scale);
    }

    std::pair<ag::Var<T>, ag::Var<T>> forward(const ag::Var<T>& z, const ag::Var<T>& a) const {
        if (z->value.ndim() != 3 || a->value.ndim() != 3 ||
            z->value.dim(1) != a->value.dim(1) || z->value.dim(2) != a->value.dim(2))
            throw ShapeError("cdib: stream spatial dims differ");
        if (z->value.dim(0) % 2 != 0 || a->value.dim(0) % 2 != 0)
            throw ShapeError("cdib: stream channel count must be even");
        auto [keep_z, send_z] = img.split_halves(z);
        auto [keep_a, send_a] = seg.split_halves(a);
        auto z_out = img.finish(z, keep_z, send_a);
        auto a_out = seg.finish(a, keep_a, send_z);
        return {z_out, a_out};
    }

    void visit(const std::string& p, const ParamVisitor<T>& v) const {
        img.visit(p + ".img", v);
        seg.visit(p + ".seg", v);
    }
};

} // namespace textsr
