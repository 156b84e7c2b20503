#include "textsr/io/image.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace textsr {

namespace {

double cubic_kernel(double x) {
    // Catmull-Rom (a = -0.5)
    const double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
    if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
    return 0.0;
}

double triangle_kernel(double x) {
    x = std::abs(x);
    return x < 1.0 ? 1.0 - x : 0.0;
}

struct TapSet {
    std::vector<int> idx;
    std::vector<double> wgt;
    int start = 0;
};

std::vector<TapSet> build_taps(int in_n, int out_n, Resample kernel) {
    std::vector<TapSet> taps(out_n);
    double ratio = static_cast<double>(in_n) / out_n;
    double stretch = std::max(1.0, ratio);
    double radius;
    switch (kernel) {
        case Resample::Nearest: radius = 0.5; break;
        case Resample::Bilinear: radius = 1.0; break;
        default: radius = 2.0; break;
    }
    double support = radius * stretch;
    for (int i = 0; i < out_n; ++i) {
        double center = (i + 0.5) * ratio - 0.5;
        TapSet& t = taps[i];
        if (kernel == Resample::Nearest) {
            int j = static_cast<int>(std::floor(center + 0.5));
            j = std::clamp(j, 0, in_n - 1);
            t.idx.push_back(j);
            t.wgt.push_back(1.0);
            continue;
        }
        int lo = static_cast<int>(std::floor(center - support));
        int hi = static_cast<int>(std::ceil(center + support));
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) {
            double x = (j - center) / stretch;
            double w = kernel == Resample::Bilinear ? triangle_kernel(x) : cubic_kernel(x);
            if (w == 0.0) continue;
            t.idx.push_back(std::clamp(j, 0, in_n - 1));
            t.wgt.push_back(w);
            sum += w;
        }
        if (sum != 0.0)
            for (double& w : t.wgt) w /= sum;
    }
    return taps;
}

} // namespace

Image resize_image(const Image& img, int oh, int ow, Resample kernel) {
    if (img.ndim() != 3) throw ShapeError("resize_image: need CHW");
    if (oh <= 0 || ow <= 0) throw ParamError("resize_image: empty target");
    int c = img.dim(0), h = img.dim(1), w = img.dim(2);
    auto tx = build_taps(w, ow, kernel);
    auto ty = build_taps(h, oh, kernel);

    Image tmp({c, h, ow});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < ow; ++x) {
                double acc = 0.0;
                const TapSet& t = tx[x];
                for (size_t k = 0; k < t.idx.size(); ++k) acc += t.wgt[k] * img.at(ci, y, t.idx[k]);
                tmp.at(ci, y, x) = static_cast<float>(acc);
            }
    Image out({c, oh, ow});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < oh; ++y) {
            const TapSet& t = ty[y];
            for (int x = 0; x < ow; ++x) {
                double acc = 0.0;
                for (size_t k = 0; k < t.idx.size(); ++k) acc += t.wgt[k] * tmp.at(ci, t.idx[k], x);
                out.at(ci, y, x) = static_cast<float>(acc);
            }
        }
    return out;
}

Image rgb_to_gray(const Image& img) {
    if (img.ndim() != 3) throw ShapeError("rgb_to_gray: need CHW");
    if (img.dim(0) == 1) return img;
    if (img.dim(0) != 3) throw ShapeError("rgb_to_gray: need 1 or 3 channels");
    int h = img.dim(1), w = img.dim(2);
    Image out({1, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(0, y, x) = 0.299f * img.at(0, y, x) + 0.587f * img.at(1, y, x) +
                              0.114f * img.at(2, y, x);
    return out;
}

void clamp01_inplace(Image& img) {
    for (int64_t i = 0; i < img.numel(); ++i) img[i] = std::clamp(img[i], 0.0f, 1.0f);
}

Image crop_image(const Image& img, int x, int y, int w, int h) {
    if (img.ndim() != 3) throw ShapeError("crop_image: need CHW");
    if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > img.dim(2) || y + h > img.dim(1))
        throw DataError("crop_image: region out of bounds");
    Image out({img.dim(0), h, w});
    for (int c = 0; c < img.dim(0); ++c)
        for (int yy = 0; yy < h; ++yy)
            for (int xx = 0; xx < w; ++xx) out.at(c, yy, xx) = img.at(c, y + yy, x + xx);
    return out;
}

} // namespace textsr
