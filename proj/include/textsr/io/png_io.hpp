#pragma once

#include <string>

#include "textsr/io/image.hpp"

namespace textsr {

// 8-bit PNG round trip. Writing quantizes with round(v*255) after clamping;
// reading maps bytes back to [0,1]. RGB for 3-channel, grayscale for 1-channel.
void write_png(const std::string& path, const Image& img);

// Returns {1,H,W} or {3,H,W}; palette/16-bit/alpha inputs are normalized.
Image read_png(const std::string& path);

} // namespace textsr
