#pragma once

#include <cstdint>

namespace textsr::kernels {

// Hot inner loops behind the autograd ops. Two implementations exist:
// a plain serial reference (namespace serial) and an OpenMP one (namespace par)
// parallelized over disjoint output rows, so both produce bitwise-identical
// results; tests compare them and tools/bench_kernels measures them.

enum class Backend { Serial, Parallel };

Backend backend();
void set_backend(Backend b);

// C {m,n} = op(A) * op(B), A logical {m,k}, B logical {k,n}.
// trans_a/trans_b select the physical layout; accumulate adds into C.
template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int n, int k,
            bool trans_a, bool trans_b, bool accumulate);

// x {ci,h,w}, w {co,ci,k,k}, bias {co} or nullptr, zero padding.
// y {co,ho,wo} with ho = (h + 2*pad - k)/stride + 1.
template <typename T>
void conv2d_fwd(const T* x, int ci, int h, int w,
                const T* wt, int co, int k, const T* bias,
                int stride, int pad, T* y, int ho, int wo);

// gx += dL/dx; gx has shape of x and must be pre-initialized by the caller.
template <typename T>
void conv2d_bwd_input(const T* gy, const T* wt, T* gx,
                      int ci, int h, int w, int co, int k,
                      int stride, int pad, int ho, int wo);

// gw += dL/dw, gb += dL/db (gb may be nullptr); pre-initialized by the caller.
template <typename T>
void conv2d_bwd_weight(const T* gy, const T* x, T* gw, T* gb,
                       int ci, int h, int w, int co, int k,
                       int stride, int pad, int ho, int wo);

namespace serial {
template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int n, int k,
            bool trans_a, bool trans_b, bool accumulate);
template <typename T>
void conv2d_fwd(const T* x, int ci, int h, int w,
                const T* wt, int co, int k, const T* bias,
                int stride, int pad, T* y, int ho, int wo);
template <typename T>
void conv2d_bwd_input(const T* gy, const T* wt, T* gx,
                      int ci, int h, int w, int co, int k,
                      int stride, int pad, int ho, int wo);
template <typename T>
void conv2d_bwd_weight(const T* gy, const T* x, T* gw, T* gb,
                       int ci, int h, int w, int co, int k,
                       int stride, int pad, int ho, int wo);
} // namespace serial

namespace par {
template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int n, int k,
            bool trans_a, bool trans_b, bool accumulate);
template <typename T>
void conv2d_fwd(const T* x, int ci, int h, int w,
                const T* wt, int co, int k, const T* bias,
                int stride, int pad, T* y, int ho, int wo);
template <typename T>
void conv2d_bwd_input(const T* gy, const T* wt, T* gx,
                      int ci, int h, int w, int co, int k,
                      int stride, int pad, int ho, int wo);
template <typename T>
void conv2d_bwd_weight(const T* gy, const T* x, T* gw, T* gb,
                       int ci, int h, int w, int co, int k,
                       int stride, int pad, int ho, int wo);
} // namespace par

} // namespace textsr::kernels
