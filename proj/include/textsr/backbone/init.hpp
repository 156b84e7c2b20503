#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "textsr/core/autograd.hpp"
#include "textsr/core/rng.hpp"

namespace textsr {

template <typename T>
using ParamVisitor = std::function<void(const std::string&, const ag::Var<T>&)>;

namespace init {

template <typename T>
ag::Var<T> normal(Rng& rng, std::vector<int> shape, double std) {
    Tensor<T> t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.normal() * std);
    return ag::parameter(std::move(t));
}

template <typename T>
ag::Var<T> he_conv(Rng& rng, int co, int ci, int k) {
    return normal<T>(rng, {co, ci, k, k}, std::sqrt(2.0 / (ci * k * k)));
}

template <typename T>
ag::Var<T> he_linear(Rng& rng, int out, int in) {
    return normal<T>(rng, {out, in}, std::sqrt(1.0 / in));
}

template <typename T>
ag::Var<T> zeros(std::vector<int> shape) {
    return ag::parameter(Tensor<T>(std::move(shape)));
}

template <typename T>
ag::Var<T> full(std::vector<int> shape, double v) {
    return ag::parameter(Tensor<T>(std::move(shape), static_cast<T>(v)));
}

} // namespace init

// Largest group count <= 8 that divides the channel count.
inline int gn_groups(int channels) {
    int g = channels < 8 ? channels : 8;
    while (g > 1 && channels % g != 0) --g;
    return g;
}

} // namespace textsr
