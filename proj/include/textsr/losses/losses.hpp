#pragma once

#include <functional>

#include "textsr/config.hpp"
#include "textsr/core/ops.hpp"

namespace textsr::losses {

template <typename T>
using PerceptualFn = std::function<ag::Var<T>(const ag::Var<T>&, const ag::Var<T>&)>;

template <typename T>
ag::Var<T> ones_like(const ag::Var<T>& x) {
    return ag::constant(Tensor<T>(x->value.shape(), T(1)));
}

template <typename T>
void check_mask_domain(const ag::Var<T>& m, const char* who) {
    for (int64_t i = 0; i < m->value.numel(); ++i)
        if (!(m->value[i] >= T(0) && m->value[i] <= T(1)))
            throw ParamError(std::string(who) + ": mask values must lie in [0,1]");
}

template <typename T>
ag::Var<T> mse_loss(const ag::Var<T>& a, const ag::Var<T>& b) {
    auto d = ag::sub(a, b);
    return ag::mean_all(ag::mul(d, d));
}

// Gradient-domain focal term: per-pixel misclassification probability
// (1 - s_hat*s - (1-s_hat)*(1-s)) raised to gamma, weighting the squared
// difference of edge responses; mean reduction.
template <typename T>
ag::Var<T> mf_loss(const ag::Var<T>& x_hat, const ag::Var<T>& x, const ag::Var<T>& s_hat,
                   const ag::Var<T>& s, double gamma) {
    check_same_shape(x_hat->value, x->value, "mf_loss");
    check_same_shape(s_hat->value, s->value, "mf_loss");
    check_mask_domain(s_hat, "mf_loss");
    check_mask_domain(s, "mf_loss");
    auto one = ones_like(s);
    auto correct = ag::add(ag::mul(s_hat, s), ag::mul(ag::sub(one, s_hat), ag::sub(one, s)));
    auto weight = ag::powc(ag::sub(one, correct), gamma); // {1,H,W}
    auto d = ag::sub(ag::sobel(x_hat), ag::sobel(x));
    return ag::mean_all(ag::mul_bcast_c(weight, ag::mul(d, d)));
}

template <typename T>
ag::Var<T> focal_loss(const ag::Var<T>& s_hat, const ag::Var<T>& s, double gamma,
                      double clamp_eps = 1e-6) {
    check_same_shape(s_hat->value, s->value, "focal_loss");
    auto p = ag::clampv(s_hat, clamp_eps, 1.0 - clamp_eps);
    auto one = ones_like(s);
    auto pt = ag::add(ag::mul(p, s), ag::mul(ag::sub(one, p), ag::sub(one, s)));
    auto w = ag::powc(ag::sub(one, pt), gamma);
    return ag::mean_all(ag::neg(ag::mul(w, ag::logv(pt))));
}

template <typename T>
ag::Var<T> dice_loss(const ag::Var<T>& s_hat, const ag::Var<T>& s, double smooth = 1.0) {
    check_same_shape(s_hat->value, s->value, "dice_loss");
    auto inter = ag::sum_all(ag::mul(s_hat, s));
    auto num = ag::add_scalar(ag::mul_scalar(inter, 2.0), smooth);
    auto den = ag::add_scalar(ag::add(ag::sum_all(s_hat), ag::sum_all(s)), smooth);
    return ag::add_scalar(ag::neg(ag::div(num, den)), 1.0);
}

// Default perceptual distance: mean L1 between edge-response stacks of a
// three-level binomial pyramid. Zero at identity, symmetric, differentiable.
template <typename T>
ag::Var<T> pyramid_gradient_distance(const ag::Var<T>& a, const ag::Var<T>& b) {
    check_same_shape(a->value, b->value, "perceptual");
    ag::Var<T> total;
    ag::Var<T> pa = a, pb = b;
    for (int level = 0; level < 3; ++level) {
        auto d = ag::mean_all(ag::absv(ag::sub(ag::sobel(pa), ag::sobel(pb))));
        total = total ? ag::add(total, d) : d;
        if (level < 2) {
            pa = ag::downsample2(ag::blur5(pa));
            pb = ag::downsample2(ag::blur5(pb));
        }
    }
    return ag::mul_scalar(total, 1.0 / 3.0);
}

template <typename T>
ag::Var<T> img_loss(const ag::Var<T>& x_hat, const ag::Var<T>& x, const ag::Var<T>& s_hat,
                    const ag::Var<T>& s, const LossConfig& w, const PerceptualFn<T>& perceptual) {
    auto loss = mse_loss(x_hat, x);
    if (w.lambda1 != 0.0)
        loss = ag::add(loss, ag::mul_scalar(perceptual(x_hat, x), w.lambda1));
    if (w.lambda2 != 0.0)
        loss = ag::add(loss, ag::mul_scalar(mf_loss(x_hat, x, s_hat, s, w.gamma), w.lambda2));
    return loss;
}

template <typename T>
ag::Var<T> seg_loss(const ag::Var<T>& s_hat, const ag::Var<T>& s, const LossConfig& w) {
    auto loss = mse_loss(s_hat, s);
    if (w.lambda3 != 0.0)
        loss = ag::add(loss, ag::mul_scalar(focal_loss(s_hat, s, w.gamma, w.focal_clamp), w.lambda3));
    if (w.lambda4 != 0.0)
        loss = ag::add(loss, ag::mul_scalar(dice_loss(s_hat, s, w.dice_smooth), w.lambda4));
    return loss;
}

template <typename T>
ag::Var<T> total_loss(const ag::Var<T>& x_hat, const ag::Var<T>& x, const ag::Var<T>& s_hat,
                      const ag::Var<T>& s, const LossConfig& w, const PerceptualFn<T>& perceptual) {
    return ag::add(img_loss(x_hat, x, s_hat, s, w, perceptual), seg_loss(s_hat, s, w));
}

} // namespace textsr::losses
