#include "stereomix/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "stereomix/common.hpp"

namespace smx {

namespace {

// Uniform point inside pixel (px,py)'s unit cell clipped to Omega, then the
// cell's own gt value. Draws in [lo, hi) around the center so the point always
// rounds back to (px,py).
SamplePoint point_in_cell(const DisparityField& gt, int px, int py, Rng& rng) {
    const double x_lo = std::max(px - 0.5, 0.0);
    const double x_hi = std::min(px + 0.5, static_cast<double>(gt.width - 1));
    const double y_lo = std::max(py - 0.5, 0.0);
    const double y_hi = std::min(py + 0.5, static_cast<double>(gt.height - 1));
    return {rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), gt.at(px, py)};
}

std::vector<SamplePoint> sample_from_pixels(const DisparityField& gt,
                                            const std::vector<int>& pixels, int n,
                                            Rng& rng) {
    std::vector<SamplePoint> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const int idx = pixels[rng.uniform_int(pixels.size())];
        out.push_back(point_in_cell(gt, idx % gt.width, idx / gt.width, rng));
    }
    return out;
}

} // namespace

size_t BoundaryMask::count() const {
    return static_cast<size_t>(std::count(m.begin(), m.end(), uint8_t{1}));
}

BoundaryMask boundary_mask(const DisparityField& gt, double threshold) {
    if (!gt.dense()) throw ConfigError("boundary mask requires dense ground truth");
    BoundaryMask mask(gt.width, gt.height);
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            const double v = gt.at(x, y);
            const bool hit = (x > 0 && std::abs(gt.at(x - 1, y) - v) > threshold) ||
                             (x + 1 < gt.width && std::abs(gt.at(x + 1, y) - v) > threshold) ||
                             (y > 0 && std::abs(gt.at(x, y - 1) - v) > threshold) ||
                             (y + 1 < gt.height && std::abs(gt.at(x, y + 1) - v) > threshold);
            mask.set(x, y, hit);
        }
    }
    return mask;
}

BoundaryMask dilate(const BoundaryMask& mask, int rho) {
    if (rho < 0) throw ConfigError("dilation kernel size must be >= 0");
    if (rho <= 1) return mask;
    const int lo = -(rho - 1) / 2;
    const int hi = rho / 2;
    BoundaryMask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            const int y0 = std::max(y + lo, 0), y1 = std::min(y + hi, mask.height - 1);
            const int x0 = std::max(x + lo, 0), x1 = std::min(x + hi, mask.width - 1);
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx) out.set(xx, yy, true);
        }
    }
    return out;
}

std::vector<SamplePoint> dda_sample(const DisparityField& gt, const BoundaryMask& dilated,
                                    int n, Rng& rng) {
    if (n < 2 || (n & 1)) throw ConfigError("dda_sample needs an even point count >= 2");
    if (dilated.width != gt.width || dilated.height != gt.height)
        throw ShapeError("mask / ground truth resolution mismatch");

    std::vector<int> inside, outside;
    inside.reserve(gt.d.size());
    outside.reserve(gt.d.size());
    for (size_t i = 0; i < dilated.m.size(); ++i)
        (dilated.m[i] ? inside : outside).push_back(static_cast<int>(i));

    if (inside.empty() || outside.empty()) return uniform_sample(gt, n, rng);

    std::vector<SamplePoint> pts = sample_from_pixels(gt, inside, n / 2, rng);
    std::vector<SamplePoint> rest = sample_from_pixels(gt, outside, n / 2, rng);
    pts.insert(pts.end(), rest.begin(), rest.end());
    return pts;
}

std::vector<SamplePoint> uniform_sample(const DisparityField& gt, int n, Rng& rng) {
    if (n < 1) throw ConfigError("uniform_sample needs n >= 1");
    std::vector<SamplePoint> out;
    out.reserve(n);
    if (gt.dense()) {
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform() * (gt.width - 1);
            const double y = rng.uniform() * (gt.height - 1);
            out.push_back({x, y, gt_lookup(gt, x, y)});
        }
        return out;
    }
    // Sparse gt: restrict to cells of valid pixels.
    std::vector<int> cells;
    for (size_t i = 0; i < gt.valid.size(); ++i)
        if (gt.valid[i]) cells.push_back(static_cast<int>(i));
    if (cells.empty()) throw ConfigError("no valid ground-truth pixels to sample");
    for (int i = 0; i < n; ++i) {
        const int idx = cells[rng.uniform_int(cells.size())];
        out.push_back(point_in_cell(gt, idx % gt.width, idx / gt.width, rng));
    }
    return out;
}

double gt_lookup(const DisparityField& gt, double x, double y) {
    if (!(x >= 0.0 && x <= gt.width - 1 && y >= 0.0 && y <= gt.height - 1))
        throw DomainError("ground-truth lookup out of domain");
    const int px = static_cast<int>(std::floor(x + 0.5));
    const int py = static_cast<int>(std::floor(y + 0.5));
    return gt.at(std::min(px, gt.width - 1), std::min(py, gt.height - 1));
}

} // namespace smx
