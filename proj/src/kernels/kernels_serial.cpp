#include "textsr/kernels/kernels.hpp"

#include <cstddef>

// Reference kernels: the most direct loop nest for each operation. Per output
// element the accumulation order is (l) for matmul and (ci,ky,kx) resp.
// (co,ky,kx) / (oy,ox) for the conv kernels; the parallel versions follow the
// same order so results match bitwise.

namespace textsr::kernels::serial {

template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int n, int k,
            bool trans_a, bool trans_b, bool accumulate) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            T acc = accumulate ? c[static_cast<size_t>(i) * n + j] : T(0);
            for (int l = 0; l < k; ++l) {
                T av = trans_a ? a[static_cast<size_t>(l) * m + i]
                               : a[static_cast<size_t>(i) * k + l];
                T bv = trans_b ? b[static_cast<size_t>(j) * k + l]
                               : b[static_cast<size_t>(l) * n + j];
                acc += av * bv;
            }
            c[static_cast<size_t>(i) * n + j] = acc;
        }
    }
}

template <typename T>
void conv2d_fwd(const T* x, int ci, int h, int w,
                const T* wt, int co, int k, const T* bias,
                int stride, int pad, T* y, int ho, int wo) {
    for (int oc = 0; oc < co; ++oc) {
        for (int oy = 0; oy < ho; ++oy) {
            for (int ox = 0; ox < wo; ++ox) {
                T acc = bias ? bias[oc] : T(0);
                for (int ic = 0; ic < ci; ++ic) {
                    for (int ky = 0; ky < k; ++ky) {
                        int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= w) continue;
                            acc += wt[((static_cast<size_t>(oc) * ci + ic) * k + ky) * k + kx] *
                                   x[(static_cast<size_t>(ic) * h + iy) * w + ix];
                        }
                    }
                }
                y[(static_cast<size_t>(oc) * ho + oy) * wo + ox] = acc;
            }
        }
    }
}

template <typename T>
void conv2d_bwd_input(const T* gy, const T* wt, T* gx,
                      int ci, int h, int w, int co, int k,
                      int stride, int pad, int ho, int wo) {
    // Folds each contribution straight into gx so the accumulation sequence
    // per element matches the parallel kernel even on non-zero buffers.
    for (int ic = 0; ic < ci; ++ic) {
        for (int iy = 0; iy < h; ++iy) {
            for (int ix = 0; ix < w; ++ix) {
                T* dst = gx + (static_cast<size_t>(ic) * h + iy) * w + ix;
                for (int oc = 0; oc < co; ++oc) {
                    for (int ky = 0; ky < k; ++ky) {
                        int ty = iy + pad - ky;
                        if (ty < 0 || ty % stride != 0) continue;
                        int oy = ty / stride;
                        if (oy >= ho) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            int tx = ix + pad - kx;
                            if (tx < 0 || tx % stride != 0) continue;
                            int ox = tx / stride;
                            if (ox >= wo) continue;
                            *dst += wt[((static_cast<size_t>(oc) * ci + ic) * k + ky) * k + kx] *
                                    gy[(static_cast<size_t>(oc) * ho + oy) * wo + ox];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void conv2d_bwd_weight(const T* gy, const T* x, T* gw, T* gb,
                       int ci, int h, int w, int co, int k,
                       int stride, int pad, int ho, int wo) {
    for (int oc = 0; oc < co; ++oc) {
        for (int ic = 0; ic < ci; ++ic) {
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    T acc = T(0);
                    for (int oy = 0; oy < ho; ++oy) {
                        int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        for (int ox = 0; ox < wo; ++ox) {
                            int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= w) continue;
                            acc += gy[(static_cast<size_t>(oc) * ho + oy) * wo + ox] *
                                   x[(static_cast<size_t>(ic) * h + iy) * w + ix];
                        }
                    }
                    gw[((static_cast<size_t>(oc) * ci + ic) * k + ky) * k + kx] += acc;
                }
            }
        }
    }
    if (gb) {
        for (int oc = 0; oc < co; ++oc) {
            T acc = T(0);
            for (int oy = 0; oy < ho; ++oy)
                for (int ox = 0; ox < wo; ++ox)
                    acc += gy[(static_cast<size_t>(oc) * ho + oy) * wo + ox];
            gb[oc] += acc;
        }
    }
}

template void matmul<float>(const float*, const float*, float*, int, int, int, bool, bool, bool);
template void matmul<double>(const double*, const double*, double*, int, int, int, bool, bool, bool);
template void conv2d_fwd<float>(const float*, int, int, int, const float*, int, int, const float*, int, int, float*, int, int);
template void conv2d_fwd<double>(const double*, int, int, int, const double*, int, int, const double*, int, int, double*, int, int);
template void conv2d_bwd_input<float>(const float*, const float*, float*, int, int, int, int, int, int, int, int, int);
template void conv2d_bwd_input<double>(const double*, const double*, double*, int, int, int, int, int, int, int, int, int);
template void conv2d_bwd_weight<float>(const float*, const float*, float*, float*, int, int, int, int, int, int, int, int, int);
template void conv2d_bwd_weight<double>(const double*, const double*, double*, double*, int, int, int, int, int, int, int, int, int);

} // namespace textsr::kernels::serial
