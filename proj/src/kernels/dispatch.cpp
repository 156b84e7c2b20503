#include "textsr/kernels/kernels.hpp"

#include <atomic>

namespace textsr::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::Parallel};
}

Backend backend() { return g_backend.load(std::memory_order_relaxed); }
void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

template <typename T>
void matmul(const T* a, const T* b, T* c, int m, int n, int k,
            bool trans_a, bool trans_b, bool accumulate) {
    if (backend() == Backend::Serial)
        serial::matmul(a, b, c, m, n, k, trans_a, trans_b, accumulate);
    else
        par::matmul(a, b, c, m, n, k, trans_a, trans_b, accumulate);
}

template <typename T>
void conv2d_fwd(const T* x, int ci, int h, int w,
                const T* wt, int co, int k, const T* bias,
                int stride, int pad, T* y, int ho, int wo) {
    if (backend() == Backend::Serial)
        serial::conv2d_fwd(x, ci, h, w, wt, co, k, bias, stride, pad, y, ho, wo);
    else
        par::conv2d_fwd(x, ci, h, w, wt, co, k, bias, stride, pad, y, ho, wo);
}

template <typename T>
void conv2d_bwd_input(const T* gy, const T* wt, T* gx,
                      int ci, int h, int w, int co, int k,
                      int stride, int pad, int ho, int wo) {
    if (backend() == Backend::Serial)
        serial::conv2d_bwd_input(gy, wt, gx, ci, h, w, co, k, stride, pad, ho, wo);
    else
        par::conv2d_bwd_input(gy, wt, gx, ci, h, w, co, k, stride, pad, ho, wo);
}

template <typename T>
void conv2d_bwd_weight(const T* gy, const T* x, T* gw, T* gb,
                       int ci, int h, int w, int co, int k,
                       int stride, int pad, int ho, int wo) {
    if (backend() == Backend::Serial)
        serial::conv2d_bwd_weight(gy, x, gw, gb, ci, h, w, co, k, stride, pad, ho, wo);
    else
        par::conv2d_bwd_weight(gy, x, gw, gb, ci, h, w, co, k, stride, pad, ho, wo);
}

template void matmul<float>(const float*, const float*, float*, int, int, int, bool, bool, bool);
template void matmul<double>(const double*, const double*, double*, int, int, int, bool, bool, bool);
template void conv2d_fwd<float>(const float*, int, int, int, const float*, int, int, const float*, int, int, float*, int, int);
template void conv2d_fwd<double>(const double*, int, int, int, const double*, int, int, const double*, int, int, double*, int, int);
template void conv2d_bwd_input<float>(const float*, const float*, float*, int, int, int, int, int, int, int, int, int);
template void conv2d_bwd_input<double>(const double*, const double*, double*, int, int, int, int, int, int, int, int, int);
template void conv2d_bwd_weight<float>(const float*, const float*, float*, float*, int, int, int, int, int, int, int, int, int);
template void conv2d_bwd_weight<double>(const double*, const double*, double*, double*, int, int, int, int, int, int, int, int, int);

} // namespace textsr::kernels
