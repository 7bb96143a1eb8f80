#pragma once

#include <cstdint>
#include <vector>

#include "stereomix/rng.hpp"

namespace smx {

// Dense (or sparse, via validity mask) grid of normalized disparity in [0,1].
struct DisparityField {
    int width = 0, height = 0;
    std::vector<double> d;
    std::vector<uint8_t> valid; // empty => dense

    DisparityField() = default;
    DisparityField(int w, int h, double fill = 0.0)
        : width(w), height(h), d(static_cast<size_t>(w) * h, fill) {}

    bool dense() const { return valid.empty(); }
    bool is_valid(int x, int y) const {
        return valid.empty() || valid[static_cast<size_t>(y) * width + x];
    }
    double at(int x, int y) const { return d[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return d[static_cast<size_t>(y) * width + x]; }
};

struct BoundaryMask {
    int width = 0, height = 0;
    std::vector<uint8_t> m;

    BoundaryMask() = default;
    BoundaryMask(int w, int h) : width(w), height(h), m(static_cast<size_t>(w) * h, 0) {}
    bool at(int x, int y) const { return m[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { m[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    size_t count() const;
};

// Continuous coordinate in the GT grid's domain plus its ground-truth value.
struct SamplePoint {
    double x, y;
    double d;
};

// Pixel marked iff any 4-neighbor differs by more than `threshold` (strict).
// Requires dense gt.
BoundaryMask boundary_mask(const DisparityField& gt, double threshold);

// Morphological dilation with a rho x rho square element; rho <= 1 is identity.
// Even rho anchors at offsets [-(rho-1)/2, rho/2].
BoundaryMask dilate(const BoundaryMask& mask, int rho);

// N/2 points uniform over the cells of masked pixels, N/2 over the rest; every
// point carries the nearest-neighbor gt value. Degenerate masks (empty or
// full) fall back to uniform sampling over the whole domain.
std::vector<SamplePoint> dda_sample(const DisparityField& gt, const BoundaryMask& dilated,
                                    int n, Rng& rng);

// N i.i.d. uniform points over Omega (restricted to valid cells for sparse gt).
std::vector<SamplePoint> uniform_sample(const DisparityField& gt, int n, Rng& rng);

// Nearest-neighbor read, round half up. Throws DomainError outside Omega.
double gt_lookup(const DisparityField& gt, double x, double y);

} // namespace smx
