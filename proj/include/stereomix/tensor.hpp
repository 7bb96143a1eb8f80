#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace smx {

// Dense W x H x C grid, row-major with channels innermost: index = (y*W + x)*C + c.
struct Tensor {
    int width = 0, height = 0, channels = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c) {
        assert(x >= 0 && x < width && y >= 0 && y < height && c >= 0 && c < channels);
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        assert(x >= 0 && x < width && y >= 0 && y < height && c >= 0 && c < channels);
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    const double* row_ptr(int x, int y) const {
        return &data[(static_cast<size_t>(y) * width + x) * channels];
    }
    double* row_ptr(int x, int y) {
        return &data[(static_cast<size_t>(y) * width + x) * channels];
    }

    size_t size() const { return data.size(); }
    bool same_shape(const Tensor& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

} // namespace smx
