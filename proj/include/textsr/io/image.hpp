#pragma once

#include "textsr/core/tensor.hpp"

namespace textsr {

// Images are Tensor<float> in CHW layout, C in {1,3}, values in [0,1].
using Image = Tensor<float>;

enum class Resample { Nearest, Bilinear, Bicubic };

// Separable resize with replicate edges. Downscaling stretches the kernel
// support by the scale ratio (antialiasing) and renormalizes the taps.
Image resize_image(const Image& img, int oh, int ow, Resample kernel);

Image rgb_to_gray(const Image& img); // ITU-R 601 luma; pass-through for 1ch

void clamp01_inplace(Image& img);

// crop a CHW region; throws if out of bounds
Image crop_image(const Image& img, int x, int y, int w, int h);

} // namespace textsr
