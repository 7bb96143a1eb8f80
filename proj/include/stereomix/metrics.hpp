#pragma once

#include <cstddef>
#include <vector>

#include "stereomix/sampling.hpp"

namespace smx {

// Per-pixel error values in raw disparity units; `valid` marks the evaluated
// region (boundary pixels for SEE, everything for EPE).
struct ErrorField {
    int width = 0, height = 0;
    std::vector<double> err;
    std::vector<uint8_t> valid;

    size_t count() const;
    double avg() const; // 0 when the region is empty
};

// Soft Edge Error: per boundary pixel, min |pred(p) - gt(q)| over the k x k gt
// patch centered at p, clipped at borders. k odd. Reported in raw disparity
// units (inputs are normalized, scaled back by d_max).
ErrorField see_k(const DisparityField& pred, const DisparityField& gt,
                 const BoundaryMask& boundary, int k, double d_max);

// End point error |pred - gt| per pixel, raw units.
ErrorField epe(const DisparityField& pred, const DisparityField& gt, double d_max);

// Percentage of evaluated pixels with error strictly greater than delta.
double sigma(const ErrorField& err, double delta);

// Sufficient statistics for one metric over one region; reports merge by
// summing these, so aggregates equal pixel-count-weighted means exactly.
struct MetricAccum {
    size_t count = 0;
    double err_sum = 0.0;
    size_t exceed1 = 0, exceed2 = 0, exceed3 = 0; // strict >, delta = 1,2,3 raw px

    double avg() const { return count ? err_sum / static_cast<double>(count) : 0.0; }
    double sigma(int delta) const;
    void add(double e);
    void merge(const MetricAccum& o);
};

struct ErrorReport {
    MetricAccum see3, see5, epe;

    double see3_avg() const { return see3.avg(); }
    double see5_avg() const { return see5.avg(); }
    double epe_avg() const { return epe.avg(); }
    size_t boundary_pixels() const { return see3.count; }
    size_t total_pixels() const { return epe.count; }
    void merge(const ErrorReport& o);
};

// Boundary mask from gt (threshold 1 raw pixel, no dilation), SEE_3 / SEE_5
// over boundary pixels, EPE over all pixels.
ErrorReport evaluate(const DisparityField& pred, const DisparityField& gt, double d_max);

} // namespace smx
