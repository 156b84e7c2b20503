#include "textsr/kernels/kernels.hpp"

#include <cstddef>
#include <cstring>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

// OpenMP kernels. Work is split over disjoint output rows only, and every
// output element accumulates its contributions in the same order as the
// serial reference, so results are bitwise identical for any thread count.

namespace textsr::kernels::par {

namespace {

// first ox with ox*stride + kk - pad >= 0
inline int ox_lo(int kk, int pad, int stride) {
    int t = pad - kk;
    return t > 0 ? (t + stride - 1) / stride : 0;
}

// one past the last ox with ox*stride + kk - pad <= limit-1
inline int ox_hi(int kk, int pad, int stride, int limit, int wo) {
    int t = limit - 1 - kk + pad;
    if (t < 0) return 0;
    int hi = t / stride + 1;
    return hi < wo ? hi : wo;
}

} // namespace

template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int n, int k,
            bool trans_a, bool trans_b, bool accumulate) {
    if (!trans_a && !trans_b) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < m; ++i) {
            T* crow = c + static_cast<size_t>(i) * n;
            if (!accumulate)
                for (int j = 0; j < n; ++j) crow[j] = T(0);
            const T* arow = a + static_cast<size_t>(i) * k;
            for (int l = 0; l < k; ++l) {
                T av = arow[l];
                const T* brow = b + static_cast<size_t>(l) * n;
                for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    } else if (!trans_a && trans_b) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < m; ++i) {
            const T* arow = a + static_cast<size_t>(i) * k;
            T* crow = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                const T* brow = b + static_cast<size_t>(j) * k;
                T acc = accumulate ? crow[j] : T(0);
                for (int l = 0; l < k; ++l) acc += arow[l] * brow[l];
                crow[j] = acc;
            }
        }
    } else if (trans_a && !trans_b) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < m; ++i) {
            T* crow = c + static_cast<size_t>(i) * n;
            if (!accumulate)
                for (int j = 0; j < n; ++j) crow[j] = T(0);
            for (int l = 0; l < k; ++l) {
                T av = a[static_cast<size_t>(l) * m + i];
                const T* brow = b + static_cast<size_t>(l) * n;
                for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    } else {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < m; ++i) {
            T* crow = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                T acc = accumulate ? crow[j] : T(0);
                for (int l = 0; l < k; ++l)
                    acc += a[static_cast<size_t>(l) * m + i] * b[static_cast<size_t>(j) * k + l];
                crow[j] = acc;
            }
        }
    }
}

template <typename T>
void conv2d_fwd(const T* x, int ci, int h, int w,
                const T* wt, int co, int k, const T* bias,
                int stride, int pad, T* y, int ho, int wo) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int oc = 0; oc < co; ++oc) {
        for (int oy = 0; oy < ho; ++oy) {
            T* yrow = y + (static_cast<size_t>(oc) * ho + oy) * wo;
            T b = bias ? bias[oc] : T(0);
            for (int ox = 0; ox < wo; ++ox) yrow[ox] = b;
            for (int ic = 0; ic < ci; ++ic) {
                for (int ky = 0; ky < k; ++ky) {
                    int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= h) continue;
                    const T* xrow = x + (static_cast<size_t>(ic) * h + iy) * w;
                    const T* wrow = wt + ((static_cast<size_t>(oc) * ci + ic) * k + ky) * k;
                    for (int kx = 0; kx < k; ++kx) {
                        T wv = wrow[kx];
                        int lo = ox_lo(kx, pad, stride);
                        int hi = ox_hi(kx, pad, stride, w, wo);
                        int shift = kx - pad;
                        if (stride == 1) {
                            const T* xs = xrow + shift;
                            for (int ox = lo; ox < hi; ++ox) yrow[ox] += wv * xs[ox];
                        } else {
                            for (int ox = lo; ox < hi; ++ox)
                                yrow[ox] += wv * xrow[ox * stride + shift];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void conv2d_bwd_input(const T* gy, const T* wt, T* gx,
                      int ci, int h, int w, int co, int k,
                      int stride, int pad, int ho, int wo) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int ic = 0; ic < ci; ++ic) {
        for (int iy = 0; iy < h; ++iy) {
            T* gxrow = gx + (static_cast<size_t>(ic) * h + iy) * w;
            for (int oc = 0; oc < co; ++oc) {
                for (int ky = 0; ky < k; ++ky) {
                    int ty = iy + pad - ky;
                    if (ty < 0 || ty % stride != 0) continue;
                    int oy = ty / stride;
                    if (oy >= ho) continue;
                    const T* gyrow = gy + (static_cast<size_t>(oc) * ho + oy) * wo;
                    const T* wrow = wt + ((static_cast<size_t>(oc) * ci + ic) * k + ky) * k;
                    for (int kx = 0; kx < k; ++kx) {
                        T wv = wrow[kx];
                        int lo = ox_lo(kx, pad, stride);
                        int hi = ox_hi(kx, pad, stride, w, wo);
                        int shift = kx - pad;
                        if (stride == 1) {
                            T* gxs = gxrow + shift;
                            for (int ox = lo; ox < hi; ++ox) gxs[ox] += wv * gyrow[ox];
                        } else {
                            for (int ox = lo; ox < hi; ++ox)
                                gxrow[ox * stride + shift] += wv * gyrow[ox];
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
    // gw {co, ci*k*k} += gy {co, ho*wo} * patches {ho*wo, ci*k*k}. The axpy
    // matmul form vectorizes where a per-tap dot product cannot (strict IEEE
    // order), and accumulates per element over output pixels in the same
    // ascending (oy,ox) order as the serial reference; padded taps add +0.
    static thread_local std::vector<T> scratch;
    int cols = ci * k * k;
    size_t need = static_cast<size_t>(ho) * wo * cols;
    if (scratch.size() < need) scratch.resize(need);
    T* patches = scratch.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
            T* row = patches + (static_cast<size_t>(oy) * wo + ox) * cols;
            for (int ic = 0; ic < ci; ++ic)
                for (int ky = 0; ky < k; ++ky) {
                    int iy = oy * stride + ky - pad;
                    for (int kx = 0; kx < k; ++kx) {
                        int ix = ox * stride + kx - pad;
                        row[(ic * k + ky) * k + kx] =
                            (iy < 0 || iy >= h || ix < 0 || ix >= w)
                                ? T(0)
                                : x[(static_cast<size_t>(ic) * h + iy) * w + ix];
                    }
                }
        }
    }
    matmul(gy, patches, gw, co, cols, ho * wo, false, false, true);
    if (gb) {
#pragma omp parallel for schedule(static)
        for (int oc = 0; oc < co; ++oc) {
            T acc = T(0);
            const T* gyc = gy + static_cast<size_t>(oc) * ho * wo;
            for (int i = 0; i < ho * wo; ++i) acc += gyc[i];
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

} // namespace textsr::kernels::par
