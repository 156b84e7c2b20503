#pragma once

#include <cmath>
#include <vector>

#include "textsr/core/ops.hpp"

namespace textsr {

// Diffusion scalars: alpha[t] = sqrt(prod_{s<=t}(1 - b_s)), beta[t] = sqrt(1 - alpha^2),
// with b linearly spaced over [beta_min, beta_max]. alpha^2 + beta^2 == 1 per step.
struct Schedule {
    int total_steps = 0;
    std::vector<double> alpha;
    std::vector<double> beta;

    static Schedule make(int steps, double beta_min, double beta_max) {
        if (steps < 1) throw ParamError("schedule: need at least one step");
        if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0))
            throw ParamError("schedule: need 0 < beta_min <= beta_max < 1");
        Schedule s;
        s.total_steps = steps;
        s.alpha.resize(steps);
        s.beta.resize(steps);
        double cum = 1.0;
        for (int t = 0; t < steps; ++t) {
            double b = steps == 1 ? beta_min
                                  : beta_min + (beta_max - beta_min) * t / (steps - 1);
            cum *= 1.0 - b;
            s.alpha[t] = std::sqrt(cum);
            s.beta[t] = std::sqrt(1.0 - cum);
        }
        return s;
    }

    void check_t(int t) const {
        if (t < 0 || t >= total_steps) throw ParamError("schedule: t out of range");
    }
};

// alpha_t * z + beta_t * n
template <typename T>
Tensor<T> add_noise(const Tensor<T>& z, const Tensor<T>& n, int t, const Schedule& s) {
    check_same_shape(z, n, "add_noise");
    s.check_t(t);
    Tensor<T> out(z.shape());
    T a = static_cast<T>(s.alpha[t]), b = static_cast<T>(s.beta[t]);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = a * z[i] + b * n[i];
    return out;
}

// (z - beta_t * n_hat) / alpha_t, the one-step inversion of the forward form
template <typename T>
Tensor<T> invert_forward(const Tensor<T>& z, const Tensor<T>& n_hat, int t, const Schedule& s) {
    check_same_shape(z, n_hat, "invert_forward");
    s.check_t(t);
    if (s.alpha[t] == 0.0) throw ParamError("schedule: alpha_t is zero, inversion singular");
    Tensor<T> out(z.shape());
    T a = static_cast<T>(s.alpha[t]), b = static_cast<T>(s.beta[t]);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = (z[i] - b * n_hat[i]) / a;
    return out;
}

// graph version used by the training/inference path
template <typename T>
ag::Var<T> invert_forward(const ag::Var<T>& z, const ag::Var<T>& n_hat, int t, const Schedule& s) {
    s.check_t(t);
    if (s.alpha[t] == 0.0) throw ParamError("schedule: alpha_t is zero, inversion singular");
    auto scaled = ag::mul_scalar(n_hat, s.beta[t]);
    return ag::mul_scalar(ag::sub(z, scaled), 1.0 / s.alpha[t]);
}

} // namespace textsr
