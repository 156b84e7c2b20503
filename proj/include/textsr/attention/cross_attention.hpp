#pragma once

#include <utility>
#include <vector>

#include "textsr/backbone/lora.hpp"
#include "textsr/core/ops.hpp"

namespace textsr::attn {

// Raw scores of one cross-attention layer plus its spatial extent.
template <typename T>
struct LayerScores {
    ag::Var<T> raw; // {h*w, L}, pre-softmax q*k^T
    int h = 0, w = 0;
};

template <typename T>
struct AttnStack {
    std::vector<LayerScores<T>> per_layer;
    std::vector<ag::Var<T>> tex_maps; // {1, h_m, w_m} per layer
    ag::Var<T> aggregated;            // {d_a, h, w}
};

// softmax(q k^T / sqrt(d)) v over image tokens querying prompt tokens.
// Returns the attended tokens and the raw (unscaled, pre-softmax) scores.
template <typename T>
std::pair<ag::Var<T>, ag::Var<T>> cross_attention(const ag::Var<T>& q, const ag::Var<T>& k,
                                                  const ag::Var<T>& v) {
    if (q->value.ndim() != 2 || k->value.ndim() != 2 || v->value.ndim() != 2 ||
        q->value.dim(1) != k->value.dim(1) || k->value.dim(0) != v->value.dim(0))
        throw ShapeError("cross_attention: incompatible q/k/v shapes");
    int d = q->value.dim(1);
    auto raw = ag::linear(q, k, ag::Var<T>{}); // q * k^T, {N, L}
    auto attnw = ag::softmax_rows(ag::mul_scalar(raw, 1.0 / std::sqrt(static_cast<double>(d))));
    auto out = ag::matmul(attnw, v);
    return {out, raw};
}

// Convenience overload from feature tokens and prompt embedding with plain
// projection matrices (used directly by tests; the layer below adds adapters).
template <typename T>
std::pair<ag::Var<T>, ag::Var<T>> cross_attention(const ag::Var<T>& z_tokens,
                                                  const ag::Var<T>& cy,
                                                  const ag::Var<T>& wq, const ag::Var<T>& wk,
                                                  const ag::Var<T>& wv) {
    auto q = ag::linear(z_tokens, wq, ag::Var<T>{});
    auto k = ag::linear(cy, wk, ag::Var<T>{});
    auto v = ag::linear(cy, wv, ag::Var<T>{});
    return cross_attention(q, k, v);
}

// Column tex_index of the raw scores, reshaped to the layer's spatial map.
template <typename T>
ag::Var<T> search_text_slice(const ag::Var<T>& raw, int tex_index, int h, int w) {
    if (raw->value.ndim() != 2 || raw->value.dim(0) != h * w)
        throw ShapeError("search_text_slice: token/spatial mismatch");
    return ag::reshape(ag::slice_col(raw, tex_index), {1, h, w});
}

// Resize every per-layer map to the target grid, concatenate along channels,
// and project to agg channels with a 1x1 map (weight {d_a, M, 1, 1}).
template <typename T>
ag::Var<T> aggregate_attention(const std::vector<ag::Var<T>>& tex_maps, int h, int w,
                               const ag::Var<T>& w_agg) {
    if (tex_maps.empty()) throw ParamError("aggregate_attention: no maps");
    if (w_agg->value.dim(1) != static_cast<int>(tex_maps.size()))
        throw ShapeError("aggregate_attention: projection expects " +
                         std::to_string(w_agg->value.dim(1)) + " maps");
    std::vector<ag::Var<T>> resized;
    resized.reserve(tex_maps.size());
    for (const auto& m : tex_maps) resized.push_back(ag::resize_bilinear(m, h, w));
    return ag::conv2d(ag::concat_channels(resized), w_agg, ag::Var<T>{}, 1, 0);
}

// One cross-attention layer inside the U-Net: LoRA-adapted q/k/v projections,
// plain output projection, residual connection.
template <typename T>
struct CrossAttentionLayer {
    LoraLinear<T> wq, wk, wv;
    ag::Var<T> wo_w, wo_b;
    int channels = 0, attn_dim = 0;

    CrossAttentionLayer() = default;

    CrossAttentionLayer(Rng& rng, int channels_, int embed_dim, int attn_dim_, int rank,
                        double scale)
        : channels(channels_), attn_dim(attn_dim_) {
        wq = LoraLinear<T>(rng, attn_dim, channels, rank, scale, false);
        wk = LoraLinear<T>(rng, attn_dim, embed_dim, rank, scale, false);
        wv = LoraLinear<T>(rng, attn_dim, embed_dim, rank, scale, false);
        wo_w = init::normal<T>(rng, {channels, attn_dim}, std::sqrt(1.0 / attn_dim));
        wo_b = init::zeros<T>({channels});
    }

    // x {C,H,W}, cy {L,e} -> (x + attended, raw scores {H*W, L})
    std::pair<ag::Var<T>, LayerScores<T>> forward(const ag::Var<T>& x,
                                                  const ag::Var<T>& cy) const {
        int h = x->value.dim(1), w = x->value.dim(2);
        auto tokens = ag::tokens_from_chw(x);
        auto q = wq.forward(tokens);
        auto k = wk.forward(cy);
        auto v = wv.forward(cy);
        auto [att, raw] = cross_attention(q, k, v);
        auto out = ag::add(x, ag::chw_from_tokens(ag::linear(att, wo_w, wo_b), h, w));
        return {out, LayerScores<T>{raw, h, w}};
    }

    void visit(const std::string& p, const ParamVisitor<T>& v) const {
        wq.visit(p + ".wq", v);
        wk.visit(p + ".wk", v);
        wv.visit(p + ".wv", v);
        v(p + ".wo.w", wo_w);
        v(p + ".wo.b", wo_b);
    }
};

} // namespace textsr::attn
