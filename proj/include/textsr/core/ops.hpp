#pragma once

#include <cmath>
#include <vector>

#include "textsr/core/autograd.hpp"
#include "textsr/kernels/kernels.hpp"

namespace textsr::ag {

// ---------------------------------------------------------------- elementwise

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    check_same_shape(a->value, b->value, "add");
    auto out = Tensor<T>::uninit(a->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] + b->value[i];
    return make_op<T>(std::move(out), {a, b}, [a, b](Node<T>& self) {
        if (a->requires_grad) {
            auto& ga = a->grad_buf();
            for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += self.grad[i];
        }
        if (b->requires_grad) {
            auto& gb = b->grad_buf();
            for (int64_t i = 0; i < gb.numel(); ++i) gb[i] += self.grad[i];
        }
    });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
    check_same_shape(a->value, b->value, "sub");
    auto out = Tensor<T>::uninit(a->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] - b->value[i];
    return make_op<T>(std::move(out), {a, b}, [a, b](Node<T>& self) {
        if (a->requires_grad) {
            auto& ga = a->grad_buf();
            for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += self.grad[i];
        }
        if (b->requires_grad) {
            auto& gb = b->grad_buf();
            for (int64_t i = 0; i < gb.numel(); ++i) gb[i] -= self.grad[i];
        }
    });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    check_same_shape(a->value, b->value, "mul");
    auto out = Tensor<T>::uninit(a->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] * b->value[i];
    return make_op<T>(std::move(out), {a, b}, [a, b](Node<T>& self) {
        if (a->requires_grad) {
            auto& ga = a->grad_buf();
            for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += self.grad[i] * b->value[i];
        }
        if (b->requires_grad) {
            auto& gb = b->grad_buf();
            for (int64_t i = 0; i < gb.numel(); ++i) gb[i] += self.grad[i] * a->value[i];
        }
    });
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
    check_same_shape(a->value, b->value, "div");
    auto out = Tensor<T>::uninit(a->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = a->value[i] / b->value[i];
    return make_op<T>(std::move(out), {a, b}, [a, b](Node<T>& self) {
        if (a->requires_grad) {
            auto& ga = a->grad_buf();
            for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += self.grad[i] / b->value[i];
        }
        if (b->requires_grad) {
            auto& gb = b->grad_buf();
            for (int64_t i = 0; i < gb.numel(); ++i) {
                T bv = b->value[i];
                gb[i] -= self.grad[i] * a->value[i] / (bv * bv);
            }
        }
    });
}

template <typename T>
Var<T> mul_scalar(const Var<T>& x, double s) {
    auto out = Tensor<T>::uninit(x->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = x->value[i] * static_cast<T>(s);
    return make_op<T>(std::move(out), {x}, [x, s](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += self.grad[i] * static_cast<T>(s);
    });
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, double s) {
    auto out = Tensor<T>::uninit(x->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = x->value[i] + static_cast<T>(s);
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += self.grad[i];
    });
}

template <typename T>
Var<T> neg(const Var<T>& x) {
    return mul_scalar(x, -1.0);
}

// x^e with constant exponent; defined for x >= 0.
template <typename T>
Var<T> powc(const Var<T>& x, double e) {
    auto out = Tensor<T>::uninit(x->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i)
        out[i] = static_cast<T>(std::pow(static_cast<double>(x->value[i]), e));
    return make_op<T>(std::move(out), {x}, [x, e](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int64_t i = 0; i < gx.numel(); ++i) {
            double xv = static_cast<double>(x->value[i]);
            double d;
            if (e == 0.0)
                d = 0.0;
            else if (xv == 0.0)
                d = (e > 1.0) ? 0.0 : (e == 1.0 ? 1.0 : 0.0);
            else
                d = e * std::pow(xv, e - 1.0);
            gx[i] += self.grad[i] * static_cast<T>(d);
        }
    });
}

template <typename T>
Var<T> logv(const Var<T>& x) {
    auto out = Tensor<T>::uninit(x->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i)
        out[i] = std::log(x->value[i]);
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += self.grad[i] / x->value[i];
    });
}

template <typename T>
Var<T> absv(const Var<T>& x) {
    auto out = Tensor<T>::uninit(x->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = std::abs(x->value[i]);
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int64_t i = 0; i < gx.numel(); ++i) {
            T xv = x->value[i];
            gx[i] += self.grad[i] * (xv > T(0) ? T(1) : (xv < T(0) ? T(-1) : T(0)));
        }
    });
}

template <typename T>
Var<T> clampv(const Var<T>& x, double lo, double hi) {
    auto out = Tensor<T>::uninit(x->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) {
        T v = x->value[i];
        out[i] = v < static_cast<T>(lo) ? static_cast<T>(lo)
                                        : (v > static_cast<T>(hi) ? static_cast<T>(hi) : v);
    }
    return make_op<T>(std::move(out), {x}, [x, lo, hi](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int64_t i = 0; i < gx.numel(); ++i) {
            T v = x->value[i];
            if (v >= static_cast<T>(lo) && v <= static_cast<T>(hi)) gx[i] += self.grad[i];
        }
    });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
    auto out = Tensor<T>::uninit(x->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) {
        T v = x->value[i];
        out[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v))
                           : std::exp(v) / (T(1) + std::exp(v));
    }
    Tensor<T> y = out;
    return make_op<T>(std::move(out), {x}, [x, y](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int64_t i = 0; i < gx.numel(); ++i)
            gx[i] += self.grad[i] * y[i] * (T(1) - y[i]);
    });
}

template <typename T>
Var<T> silu(const Var<T>& x) {
    auto out = Tensor<T>::uninit(x->value.shape());
    auto sig = Tensor<T>::uninit(x->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) {
        T v = x->value[i];
        T s = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
        sig[i] = s;
        out[i] = v * s;
    }
    return make_op<T>(std::move(out), {x}, [x, sig](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int64_t i = 0; i < gx.numel(); ++i) {
            T s = sig[i];
            T v = x->value[i];
            gx[i] += self.grad[i] * (s + v * s * (T(1) - s));
        }
    });
}

// ---------------------------------------------------------------- reductions

template <typename T>
Var<T> sum_all(const Var<T>& x) {
    T acc = T(0);
    for (int64_t i = 0; i < x->value.numel(); ++i) acc += x->value[i];
    return make_op<T>(Tensor<T>::scalar(acc), {x}, [x](Node<T>& self) {
        auto& gx = x->grad_buf();
        T g = self.grad[0];
        for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += g;
    });
}

template <typename T>
Var<T> mean_all(const Var<T>& x) {
    T acc = T(0);
    int64_t n = x->value.numel();
    for (int64_t i = 0; i < n; ++i) acc += x->value[i];
    acc /= static_cast<T>(n);
    return make_op<T>(Tensor<T>::scalar(acc), {x}, [x, n](Node<T>& self) {
        auto& gx = x->grad_buf();
        T g = self.grad[0] / static_cast<T>(n);
        for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += g;
    });
}

// out = s * x with a learnable scalar s of shape {1}
template <typename T>
Var<T> scale_by(const Var<T>& x, const Var<T>& s) {
    if (s->value.numel() != 1) throw ShapeError("scale_by: scale must be a scalar");
    T sv = s->value[0];
    auto out = Tensor<T>::uninit(x->value.shape());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = sv * x->value[i];
    return make_op<T>(std::move(out), {x, s}, [x, s, sv](Node<T>& self) {
        if (x->requires_grad) {
            auto& gx = x->grad_buf();
            for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += sv * self.grad[i];
        }
        if (s->requires_grad) {
            T acc = T(0);
            for (int64_t i = 0; i < self.grad.numel(); ++i) acc += self.grad[i] * x->value[i];
            s->grad_buf()[0] += acc;
        }
    });
}

// ---------------------------------------------------------------- shape ops

template <typename T>
Var<T> reshape(const Var<T>& x, std::vector<int> shape) {
    Tensor<T> out = x->value.reshaped(shape);
    return make_op<T>(std::move(out), {x}, [x](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += self.grad[i];
    });
}

template <typename T>
Var<T> slice_channels(const Var<T>& x, int c0, int c1) {
    if (x->value.ndim() != 3 || c0 < 0 || c1 > x->value.dim(0) || c0 >= c1)
        throw ShapeError("slice_channels: bad range");
    int h = x->value.dim(1), w = x->value.dim(2);
    auto out = Tensor<T>::uninit({c1 - c0, h, w});
    int64_t plane = static_cast<int64_t>(h) * w;
    for (int c = c0; c < c1; ++c)
        for (int64_t i = 0; i < plane; ++i)
            out[(c - c0) * plane + i] = x->value[c * plane + i];
    return make_op<T>(std::move(out), {x}, [x, c0, c1, plane](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int c = c0; c < c1; ++c)
            for (int64_t i = 0; i < plane; ++i)
                gx[c * plane + i] += self.grad[(c - c0) * plane + i];
    });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
    if (xs.empty()) throw ParamError("concat_channels: empty list");
    int h = xs[0]->value.dim(1), w = xs[0]->value.dim(2);
    int ctot = 0;
    for (const auto& x : xs) {
        if (x->value.ndim() != 3 || x->value.dim(1) != h || x->value.dim(2) != w)
            throw ShapeError("concat_channels: spatial mismatch");
        ctot += x->value.dim(0);
    }
    auto out = Tensor<T>::uninit({ctot, h, w});
    int64_t plane = static_cast<int64_t>(h) * w;
    int64_t off = 0;
    for (const auto& x : xs) {
        for (int64_t i = 0; i < x->value.numel(); ++i) out[off + i] = x->value[i];
        off += x->value.numel();
    }
    return make_op<T>(std::move(out), xs, [xs, plane](Node<T>& self) {
        (void)plane;
        int64_t off = 0;
        for (const auto& x : xs) {
            if (x->requires_grad) {
                auto& gx = x->grad_buf();
                for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += self.grad[off + i];
            }
            off += x->value.numel();
        }
    });
}

// {C,H,W} -> {H*W, C} token matrix
template <typename T>
Var<T> tokens_from_chw(const Var<T>& x) {
    if (x->value.ndim() != 3) throw ShapeError("tokens_from_chw: need CHW");
    int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    int64_t hw = static_cast<int64_t>(h) * w;
    auto out = Tensor<T>::uninit({h * w, c});
    for (int ci = 0; ci < c; ++ci)
        for (int64_t p = 0; p < hw; ++p) out[p * c + ci] = x->value[ci * hw + p];
    return make_op<T>(std::move(out), {x}, [x, c, hw](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int ci = 0; ci < c; ++ci)
            for (int64_t p = 0; p < hw; ++p) gx[ci * hw + p] += self.grad[p * c + ci];
    });
}

template <typename T>
Var<T> chw_from_tokens(const Var<T>& x, int h, int w) {
    if (x->value.ndim() != 2 || x->value.dim(0) != h * w)
        throw ShapeError("chw_from_tokens: token count mismatch");
    int c = x->value.dim(1);
    int64_t hw = static_cast<int64_t>(h) * w;
    auto out = Tensor<T>::uninit({c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (int64_t p = 0; p < hw; ++p) out[ci * hw + p] = x->value[p * c + ci];
    return make_op<T>(std::move(out), {x}, [x, c, hw](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int ci = 0; ci < c; ++ci)
            for (int64_t p = 0; p < hw; ++p) gx[p * c + ci] += self.grad[ci * hw + p];
    });
}

// column j of a {m,n} matrix as {m,1}
template <typename T>
Var<T> slice_col(const Var<T>& x, int j) {
    if (x->value.ndim() != 2) throw ShapeError("slice_col: need a matrix");
    int m = x->value.dim(0), n = x->value.dim(1);
    if (j < 0 || j >= n) throw ParamError("slice_col: column index out of range");
    auto out = Tensor<T>::uninit({m, 1});
    for (int i = 0; i < m; ++i) out[i] = x->value[static_cast<int64_t>(i) * n + j];
    return make_op<T>(std::move(out), {x}, [x, j, m, n](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int i = 0; i < m; ++i) gx[static_cast<int64_t>(i) * n + j] += self.grad[i];
    });
}

// per-channel vector broadcast to a {C,H,W} map
template <typename T>
Var<T> broadcast_chw(const Var<T>& v, int h, int w) {
    if (v->value.ndim() != 1) throw ShapeError("broadcast_chw: need {C}");
    int c = v->value.dim(0);
    auto out = Tensor<T>::uninit({c, h, w});
    int64_t plane = static_cast<int64_t>(h) * w;
    for (int ci = 0; ci < c; ++ci)
        for (int64_t p = 0; p < plane; ++p) out[ci * plane + p] = v->value[ci];
    return make_op<T>(std::move(out), {v}, [v, c, plane](Node<T>& self) {
        auto& gv = v->grad_buf();
        for (int ci = 0; ci < c; ++ci) {
            T acc = T(0);
            for (int64_t p = 0; p < plane; ++p) acc += self.grad[ci * plane + p];
            gv[ci] += acc;
        }
    });
}

// w {1,H,W} gates x {C,H,W} per pixel
template <typename T>
Var<T> mul_bcast_c(const Var<T>& w, const Var<T>& x) {
    if (w->value.ndim() != 3 || w->value.dim(0) != 1) throw ShapeError("mul_bcast_c: w must be {1,H,W}");
    if (x->value.ndim() != 3 || x->value.dim(1) != w->value.dim(1) ||
        x->value.dim(2) != w->value.dim(2))
        throw ShapeError("mul_bcast_c: spatial mismatch");
    int c = x->value.dim(0);
    int64_t plane = static_cast<int64_t>(x->value.dim(1)) * x->value.dim(2);
    auto out = Tensor<T>::uninit(x->value.shape());
    for (int ci = 0; ci < c; ++ci)
        for (int64_t p = 0; p < plane; ++p)
            out[ci * plane + p] = w->value[p] * x->value[ci * plane + p];
    return make_op<T>(std::move(out), {w, x}, [w, x, c, plane](Node<T>& self) {
        if (w->requires_grad) {
            auto& gw = w->grad_buf();
            for (int64_t p = 0; p < plane; ++p) {
                T acc = T(0);
                for (int ci = 0; ci < c; ++ci) acc += self.grad[ci * plane + p] * x->value[ci * plane + p];
                gw[p] += acc;
            }
        }
        if (x->requires_grad) {
            auto& gx = x->grad_buf();
            for (int ci = 0; ci < c; ++ci)
                for (int64_t p = 0; p < plane; ++p)
                    gx[ci * plane + p] += self.grad[ci * plane + p] * w->value[p];
        }
    });
}

// ---------------------------------------------------------------- linear algebra

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
    if (a->value.ndim() != 2 || b->value.ndim() != 2 || a->value.dim(1) != b->value.dim(0))
        throw ShapeError("matmul: incompatible " + a->value.shape_str() + " x " + b->value.shape_str());
    int m = a->value.dim(0), k = a->value.dim(1), n = b->value.dim(1);
    auto out = Tensor<T>::uninit({m, n});
    kernels::matmul(a->value.data(), b->value.data(), out.data(), m, n, k, false, false, false);
    return make_op<T>(std::move(out), {a, b}, [a, b, m, n, k](Node<T>& self) {
        if (a->requires_grad)
            kernels::matmul(self.grad.data(), b->value.data(), a->grad_buf().data(),
                            m, k, n, false, true, true);
        if (b->requires_grad)
            kernels::matmul(a->value.data(), self.grad.data(), b->grad_buf().data(),
                            k, n, m, true, false, true);
    });
}

// out {m,n} = x {m,k} * w^T {k,n} + b {n}
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
    if (x->value.ndim() != 2 || w->value.ndim() != 2 || x->value.dim(1) != w->value.dim(1))
        throw ShapeError("linear: incompatible " + x->value.shape_str() + " with weight " +
                         w->value.shape_str());
    int m = x->value.dim(0), k = x->value.dim(1), n = w->value.dim(0);
    if (b && b->value.numel() != n) throw ShapeError("linear: bias size mismatch");
    auto out = Tensor<T>::uninit({m, n});
    kernels::matmul(x->value.data(), w->value.data(), out.data(), m, n, k, false, true, false);
    if (b)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) out[static_cast<int64_t>(i) * n + j] += b->value[j];
    std::vector<Var<T>> parents = b ? std::vector<Var<T>>{x, w, b} : std::vector<Var<T>>{x, w};
    return make_op<T>(std::move(out), parents, [x, w, b, m, n, k](Node<T>& self) {
        if (x->requires_grad)
            kernels::matmul(self.grad.data(), w->value.data(), x->grad_buf().data(),
                            m, k, n, false, false, true);
        if (w->requires_grad)
            kernels::matmul(self.grad.data(), x->value.data(), w->grad_buf().data(),
                            n, k, m, true, false, true);
        if (b && b->requires_grad) {
            auto& gb = b->grad_buf();
            for (int j = 0; j < n; ++j) {
                T acc = T(0);
                for (int i = 0; i < m; ++i) acc += self.grad[static_cast<int64_t>(i) * n + j];
                gb[j] += acc;
            }
        }
    });
}

// ---------------------------------------------------------------- spatial ops

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride, int pad) {
    if (x->value.ndim() != 3 || w->value.ndim() != 4)
        throw ShapeError("conv2d: need CHW input and OIKK weight");
    int ci = x->value.dim(0), h = x->value.dim(1), wd = x->value.dim(2);
    int co = w->value.dim(0), k = w->value.dim(2);
    if (w->value.dim(1) != ci) throw ShapeError("conv2d: channel mismatch");
    if (b && b->value.numel() != co) throw ShapeError("conv2d: bias size mismatch");
    int ho = (h + 2 * pad - k) / stride + 1;
    int wo = (wd + 2 * pad - k) / stride + 1;
    if (ho <= 0 || wo <= 0) throw ShapeError("conv2d: empty output");
    auto out = Tensor<T>::uninit({co, ho, wo});
    kernels::conv2d_fwd(x->value.data(), ci, h, wd, w->value.data(), co, k,
                        b ? b->value.data() : nullptr, stride, pad, out.data(), ho, wo);
    std::vector<Var<T>> parents = b ? std::vector<Var<T>>{x, w, b} : std::vector<Var<T>>{x, w};
    return make_op<T>(std::move(out), parents,
                      [x, w, b, ci, h, wd, co, k, stride, pad, ho, wo](Node<T>& self) {
        if (x->requires_grad)
            kernels::conv2d_bwd_input(self.grad.data(), w->value.data(), x->grad_buf().data(),
                                      ci, h, wd, co, k, stride, pad, ho, wo);
        if (w->requires_grad || (b && b->requires_grad))
            kernels::conv2d_bwd_weight(self.grad.data(), x->value.data(),
                                       w->grad_buf().data(),
                                       (b && b->requires_grad) ? b->grad_buf().data() : nullptr,
                                       ci, h, wd, co, k, stride, pad, ho, wo);
    });
}

template <typename T>
Var<T> upsample_nearest2(const Var<T>& x) {
    if (x->value.ndim() != 3) throw ShapeError("upsample_nearest2: need CHW");
    int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    auto out = Tensor<T>::uninit({c, 2 * h, 2 * w});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < 2 * h; ++y)
            for (int xx = 0; xx < 2 * w; ++xx)
                out.at(ci, y, xx) = x->value.at(ci, y / 2, xx / 2);
    return make_op<T>(std::move(out), {x}, [x, c, h, w](Node<T>& self) {
        auto& gx = x->grad_buf();
        Tensor<T>& g = self.grad;
        auto gat = [&](int ci, int y, int xx) -> T {
            return g[(static_cast<int64_t>(ci) * 2 * h + y) * 2 * w + xx];
        };
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx)
                    gx.at(ci, y, xx) += gat(ci, 2 * y, 2 * xx) + gat(ci, 2 * y, 2 * xx + 1) +
                                        gat(ci, 2 * y + 1, 2 * xx) + gat(ci, 2 * y + 1, 2 * xx + 1);
    });
}

namespace detail {
struct LerpTap {
    int i0, i1;
    double w1; // weight of i1; i0 gets 1-w1
};
inline LerpTap lerp_tap(int out_i, int in_n, int out_n) {
    double s = (out_i + 0.5) * static_cast<double>(in_n) / out_n - 0.5;
    int i0 = static_cast<int>(std::floor(s));
    double w1 = s - i0;
    int i1 = i0 + 1;
    if (i0 < 0) { i0 = 0; }
    if (i1 < 0) { i1 = 0; }
    if (i0 > in_n - 1) { i0 = in_n - 1; }
    if (i1 > in_n - 1) { i1 = in_n - 1; }
    return {i0, i1, w1};
}
} // namespace detail

// half-pixel bilinear resize; exact identity when sizes match
template <typename T>
Var<T> resize_bilinear(const Var<T>& x, int oh, int ow) {
    if (x->value.ndim() != 3) throw ShapeError("resize_bilinear: need CHW");
    if (oh <= 0 || ow <= 0) throw ParamError("resize_bilinear: empty target");
    int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    std::vector<detail::LerpTap> ty(oh), tx(ow);
    for (int i = 0; i < oh; ++i) ty[i] = detail::lerp_tap(i, h, oh);
    for (int i = 0; i < ow; ++i) tx[i] = detail::lerp_tap(i, w, ow);
    auto out = Tensor<T>::uninit({c, oh, ow});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < oh; ++y)
            for (int xx = 0; xx < ow; ++xx) {
                const auto& a = ty[y];
                const auto& b = tx[xx];
                double v00 = x->value.at(ci, a.i0, b.i0);
                double v01 = x->value.at(ci, a.i0, b.i1);
                double v10 = x->value.at(ci, a.i1, b.i0);
                double v11 = x->value.at(ci, a.i1, b.i1);
                double top = v00 * (1 - b.w1) + v01 * b.w1;
                double bot = v10 * (1 - b.w1) + v11 * b.w1;
                out.at(ci, y, xx) = static_cast<T>(top * (1 - a.w1) + bot * a.w1);
            }
    return make_op<T>(std::move(out), {x}, [x, c, oh, ow, ty, tx](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < oh; ++y)
                for (int xx = 0; xx < ow; ++xx) {
                    const auto& a = ty[y];
                    const auto& b = tx[xx];
                    T g = self.grad.at(ci, y, xx);
                    gx.at(ci, a.i0, b.i0) += g * static_cast<T>((1 - a.w1) * (1 - b.w1));
                    gx.at(ci, a.i0, b.i1) += g * static_cast<T>((1 - a.w1) * b.w1);
                    gx.at(ci, a.i1, b.i0) += g * static_cast<T>(a.w1 * (1 - b.w1));
                    gx.at(ci, a.i1, b.i1) += g * static_cast<T>(a.w1 * b.w1);
                }
    });
}

// 5-tap binomial blur, separable, replicate padding
template <typename T>
Var<T> blur5(const Var<T>& x) {
    if (x->value.ndim() != 3) throw ShapeError("blur5: need CHW");
    int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    static const double kk[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    auto clampi = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
    auto tmp = Tensor<T>::uninit({c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                double acc = 0;
                for (int t = -2; t <= 2; ++t)
                    acc += kk[t + 2] * x->value.at(ci, y, clampi(xx + t, w));
                tmp.at(ci, y, xx) = static_cast<T>(acc);
            }
    auto out = Tensor<T>::uninit({c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                double acc = 0;
                for (int t = -2; t <= 2; ++t)
                    acc += kk[t + 2] * tmp.at(ci, clampi(y + t, h), xx);
                out.at(ci, y, xx) = static_cast<T>(acc);
            }
    return make_op<T>(std::move(out), {x}, [x, c, h, w, clampi](Node<T>& self) {
        // adjoint: scatter through the vertical then horizontal pass
        Tensor<T> gt({c, h, w});
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx) {
                    T g = self.grad.at(ci, y, xx);
                    for (int t = -2; t <= 2; ++t)
                        gt.at(ci, clampi(y + t, h), xx) += static_cast<T>(kk[t + 2]) * g;
                }
        auto& gx = x->grad_buf();
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx) {
                    T g = gt.at(ci, y, xx);
                    for (int t = -2; t <= 2; ++t)
                        gx.at(ci, y, clampi(xx + t, w)) += static_cast<T>(kk[t + 2]) * g;
                }
    });
}

// keep every second pixel (even coordinates)
template <typename T>
Var<T> downsample2(const Var<T>& x) {
    if (x->value.ndim() != 3) throw ShapeError("downsample2: need CHW");
    int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    int oh = (h + 1) / 2, ow = (w + 1) / 2;
    auto out = Tensor<T>::uninit({c, oh, ow});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < oh; ++y)
            for (int xx = 0; xx < ow; ++xx) out.at(ci, y, xx) = x->value.at(ci, 2 * y, 2 * xx);
    return make_op<T>(std::move(out), {x}, [x, c, oh, ow](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < oh; ++y)
                for (int xx = 0; xx < ow; ++xx)
                    gx.at(ci, 2 * y, 2 * xx) += self.grad.at(ci, y, xx);
    });
}

// 3x3 edge responses, replicate padding; output {2C,H,W}: channel 2c is the
// horizontal-derivative response of input channel c, 2c+1 the vertical one.
template <typename T>
Var<T> sobel(const Var<T>& x) {
    if (x->value.ndim() != 3) throw ShapeError("sobel: need CHW");
    static const int GX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static const int GY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    auto clampi = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
    auto out = Tensor<T>::uninit({2 * c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                T ax = T(0), ay = T(0);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        T v = x->value.at(ci, clampi(y + dy, h), clampi(xx + dx, w));
                        ax += static_cast<T>(GX[dy + 1][dx + 1]) * v;
                        ay += static_cast<T>(GY[dy + 1][dx + 1]) * v;
                    }
                out.at(2 * ci, y, xx) = ax;
                out.at(2 * ci + 1, y, xx) = ay;
            }
    return make_op<T>(std::move(out), {x}, [x, c, h, w, clampi](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx) {
                    T ga = self.grad.at(2 * ci, y, xx);
                    T gb = self.grad.at(2 * ci + 1, y, xx);
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            T kx = static_cast<T>(GX[dy + 1][dx + 1]);
                            T ky = static_cast<T>(GY[dy + 1][dx + 1]);
                            gx.at(ci, clampi(y + dy, h), clampi(xx + dx, w)) += kx * ga + ky * gb;
                        }
                }
    });
}

template <typename T>
Var<T> group_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, int groups,
                  double eps = 1e-5) {
    if (x->value.ndim() != 3) throw ShapeError("group_norm: need CHW");
    int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    if (gamma->value.numel() != c || beta->value.numel() != c)
        throw ShapeError("group_norm: affine size mismatch");
    if (groups <= 0 || c % groups != 0) throw ParamError("group_norm: channels not divisible by groups");
    int cpg = c / groups;
    int64_t plane = static_cast<int64_t>(h) * w;
    int64_t gn = cpg * plane;

    auto xhat = Tensor<T>::uninit({c, h, w});
    std::vector<double> istds(groups);
    for (int g = 0; g < groups; ++g) {
        double mean = 0;
        for (int ci = g * cpg; ci < (g + 1) * cpg; ++ci)
            for (int64_t p = 0; p < plane; ++p) mean += x->value[ci * plane + p];
        mean /= static_cast<double>(gn);
        double var = 0;
        for (int ci = g * cpg; ci < (g + 1) * cpg; ++ci)
            for (int64_t p = 0; p < plane; ++p) {
                double d = x->value[ci * plane + p] - mean;
                var += d * d;
            }
        var /= static_cast<double>(gn);
        double istd = 1.0 / std::sqrt(var + eps);
        istds[g] = istd;
        for (int ci = g * cpg; ci < (g + 1) * cpg; ++ci)
            for (int64_t p = 0; p < plane; ++p)
                xhat[ci * plane + p] = static_cast<T>((x->value[ci * plane + p] - mean) * istd);
    }
    auto out = Tensor<T>::uninit({c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (int64_t p = 0; p < plane; ++p)
            out[ci * plane + p] = gamma->value[ci] * xhat[ci * plane + p] + beta->value[ci];

    return make_op<T>(std::move(out), {x, gamma, beta},
                      [x, gamma, beta, xhat, istds, groups, cpg, plane, gn](Node<T>& self) {
        int c = x->value.dim(0);
        if (gamma->requires_grad || beta->requires_grad) {
            auto& gg = gamma->grad_buf();
            auto& gb = beta->grad_buf();
            for (int ci = 0; ci < c; ++ci) {
                T ag = T(0), ab = T(0);
                for (int64_t p = 0; p < plane; ++p) {
                    ag += self.grad[ci * plane + p] * xhat[ci * plane + p];
                    ab += self.grad[ci * plane + p];
                }
                gg[ci] += ag;
                gb[ci] += ab;
            }
        }
        if (x->requires_grad) {
            auto& gx = x->grad_buf();
            for (int g = 0; g < groups; ++g) {
                double s1 = 0, s2 = 0;
                for (int ci = g * cpg; ci < (g + 1) * cpg; ++ci)
                    for (int64_t p = 0; p < plane; ++p) {
                        double hv = static_cast<double>(gamma->value[ci]) * self.grad[ci * plane + p];
                        s1 += hv;
                        s2 += hv * xhat[ci * plane + p];
                    }
                double inv_n = 1.0 / static_cast<double>(gn);
                for (int ci = g * cpg; ci < (g + 1) * cpg; ++ci)
                    for (int64_t p = 0; p < plane; ++p) {
                        double hv = static_cast<double>(gamma->value[ci]) * self.grad[ci * plane + p];
                        double xh = xhat[ci * plane + p];
                        gx[ci * plane + p] +=
                            static_cast<T>(istds[g] * (hv - s1 * inv_n - xh * s2 * inv_n));
                    }
            }
        }
    });
}

template <typename T>
Var<T> softmax_rows(const Var<T>& x) {
    if (x->value.ndim() != 2) throw ShapeError("softmax_rows: need a matrix");
    int m = x->value.dim(0), n = x->value.dim(1);
    auto out = Tensor<T>::uninit({m, n});
    for (int i = 0; i < m; ++i) {
        const T* row = x->value.data() + static_cast<int64_t>(i) * n;
        T mx = row[0];
        for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        T sum = T(0);
        T* orow = out.data() + static_cast<int64_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            orow[j] = std::exp(row[j] - mx);
            sum += orow[j];
        }
        for (int j = 0; j < n; ++j) orow[j] /= sum;
    }
    Tensor<T> y = out;
    return make_op<T>(std::move(out), {x}, [x, y, m, n](Node<T>& self) {
        auto& gx = x->grad_buf();
        for (int i = 0; i < m; ++i) {
            const T* yr = y.data() + static_cast<int64_t>(i) * n;
            const T* gr = self.grad.data() + static_cast<int64_t>(i) * n;
            T dot = T(0);
            for (int j = 0; j < n; ++j) dot += gr[j] * yr[j];
            T* gxr = gx.data() + static_cast<int64_t>(i) * n;
            for (int j = 0; j < n; ++j) gxr[j] += yr[j] * (gr[j] - dot);
        }
    });
}

// rows of an embedding table selected by token id
template <typename T>
Var<T> embedding(const Var<T>& table, const std::vector<int>& ids) {
    if (table->value.ndim() != 2) throw ShapeError("embedding: table must be {V,e}");
    int v = table->value.dim(0), e = table->value.dim(1);
    auto out = Tensor<T>::uninit({static_cast<int>(ids.size()), e});
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= v) throw ParamError("embedding: id out of range");
        for (int j = 0; j < e; ++j)
            out[static_cast<int64_t>(i) * e + j] = table->value[static_cast<int64_t>(ids[i]) * e + j];
    }
    return make_op<T>(std::move(out), {table}, [table, ids, e](Node<T>& self) {
        auto& gt = table->grad_buf();
        for (size_t i = 0; i < ids.size(); ++i)
            for (int j = 0; j < e; ++j)
                gt[static_cast<int64_t>(ids[i]) * e + j] += self.grad[static_cast<int64_t>(i) * e + j];
    });
}

} // namespace textsr::ag
