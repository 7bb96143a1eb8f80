#pragma once

#include <string>
#include <vector>

#include "stereomix/tensor.hpp"

namespace smx {

// 8-bit RGB PNG; values clamped to [0,1] and quantized with round-to-nearest.
void png_write_rgb8(const std::string& path, const Tensor& img);
Tensor png_read_rgb8(const std::string& path);

// Classic piecewise-linear jet colormap over [lo, hi] (see README).
Tensor colorize(const std::vector<double>& values, int width, int height, double lo,
                double hi);

} // namespace smx
