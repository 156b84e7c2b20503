#pragma once

#include "textsr/backbone/init.hpp"
#include "textsr/core/ops.hpp"

namespace textsr {

// Low-rank additive adapter on a linear map: out = base(x) + scale * up(down(x)).
// up starts at zero, so a fresh adapter leaves the base map untouched exactly.
template <typename T>
struct LoraLinear {
    ag::Var<T> w;    // {out, in}
    ag::Var<T> b;    // {out}, may be null
    ag::Var<T> down; // {rank, in}
    ag::Var<T> up;   // {out, rank}
    double scale = 1.0;

    LoraLinear() = default;

    LoraLinear(Rng& rng, int out, int in, int rank, double scale_, bool bias = true)
        : scale(scale_) {
        if (rank < 1 || rank > std::min(out, in))
            throw ParamError("lora: rank must be in [1, min(d_in, d_out)]");
        w = init::he_linear<T>(rng, out, in);
        if (bias) b = init::zeros<T>({out});
        down = init::normal<T>(rng, {rank, in}, std::sqrt(1.0 / in));
        up = init::zeros<T>({out, rank});
    }

    ag::Var<T> forward(const ag::Var<T>& x) const {
        auto base = ag::linear(x, w, b);
        auto delta = ag::linear(ag::linear(x, down, ag::Var<T>{}), up, ag::Var<T>{});
        return ag::add(base, ag::mul_scalar(delta, scale));
    }

    void visit(const std::string& prefix, const ParamVisitor<T>& v) const {
        v(prefix + ".w", w);
        if (b) v(prefix + ".b", b);
        v(prefix + ".down", down);
        v(prefix + ".up", up);
    }
};

// Same adapter on a 1x1 convolution.
template <typename T>
struct LoraConv1x1 {
    ag::Var<T> w;    // {co, ci, 1, 1}
    ag::Var<T> b;    // {co}
    ag::Var<T> down; // {rank, ci, 1, 1}
    ag::Var<T> up;   // {co, rank, 1, 1}
    double scale = 1.0;

    LoraConv1x1() = default;

    LoraConv1x1(Rng& rng, int co, int ci, int rank, double scale_) : scale(scale_) {
        if (rank < 1 || rank > std::min(co, ci))
            throw ParamError("lora: rank must be in [1, min(d_in, d_out)]");
        w = init::normal<T>(rng, {co, ci, 1, 1}, std::sqrt(2.0 / ci));
        b = init::zeros<T>({co});
        down = init::normal<T>(rng, {rank, ci, 1, 1}, std::sqrt(1.0 / ci));
        up = init::zeros<T>({co, rank, 1, 1});
    }

    ag::Var<T> forward(const ag::Var<T>& x) const {
        auto base = ag::conv2d(x, w, b, 1, 0);
        auto delta = ag::conv2d(ag::conv2d(x, down, ag::Var<T>{}, 1, 0), up, ag::Var<T>{}, 1, 0);
        return ag::add(base, ag::mul_scalar(delta, scale));
    }

    void visit(const std::string& prefix, const ParamVisitor<T>& v) const {
        v(prefix + ".w", w);
        v(prefix + ".b", b);
        v(prefix + ".down", down);
        v(prefix + ".up", up);
    }
};

} // namespace textsr
