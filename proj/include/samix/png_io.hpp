#pragma once

#include <string>

#include "samix/image.hpp"

namespace samix {

// 8-bit grayscale or RGB PNG -> intensities in [0,1] (255 -> 1.0, 0 -> 0.0).
// Palette/16-bit/alpha inputs are normalized to gray8 or rgb8 on read.
Image read_png(const std::string& path);

// Values are clamped to [0,1] and quantized to 8 bits.
void write_png(const std::string& path, const Image& image);

}  // namespace samix
