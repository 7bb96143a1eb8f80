#include "stereomix/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "stereomix/common.hpp"

namespace smx {

size_t ErrorField::count() const {
    return static_cast<size_t>(std::count(valid.begin(), valid.end(), uint8_t{1}));
}

double ErrorField::avg() const {
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < err.size(); ++i)
        if (valid[i]) {
            sum += err[i];
            ++n;
        }
    return n ? sum / static_cast<double>(n) : 0.0;
}

ErrorField see_k(const DisparityField& pred, const DisparityField& gt,
                 const BoundaryMask& boundary, int k, double d_max) {
    if (pred.width != gt.width || pred.height != gt.height ||
        boundary.width != gt.width || boundary.height != gt.height)
        throw ShapeError("SEE inputs must share one resolution");
    if (k < 1 || (k & 1) == 0) throw ConfigError("SEE patch size must be odd");

    const int r = k / 2;
    ErrorField out;
    out.width = gt.width;
    out.height = gt.height;
    out.err.assign(gt.d.size(), 0.0);
    out.valid.assign(gt.d.size(), 0);
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            if (!boundary.at(x, y)) continue;
            const double p = pred.at(x, y);
            double best = std::abs(p - gt.at(x, y));
            const int y0 = std::max(y - r, 0), y1 = std::min(y + r, gt.height - 1);
            const int x0 = std::max(x - r, 0), x1 = std::min(x + r, gt.width - 1);
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx)
                    best = std::min(best, std::abs(p - gt.at(xx, yy)));
            const size_t i = static_cast<size_t>(y) * gt.width + x;
            out.err[i] = best * d_max;
            out.valid[i] = 1;
        }
    }
    return out;
}

ErrorField epe(const DisparityField& pred, const DisparityField& gt, double d_max) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw ShapeError("EPE inputs must share one resolution");
    ErrorField out;
    out.width = gt.width;
    out.height = gt.height;
    out.err.resize(gt.d.size());
    out.valid.assign(gt.d.size(), 1);
    for (size_t i = 0; i < gt.d.size(); ++i)
        out.err[i] = std::abs(pred.d[i] - gt.d[i]) * d_max;
    return out;
}

double sigma(const ErrorField& err, double delta) {
    if (!(delta > 0.0)) throw ConfigError("sigma threshold must be positive");
    size_t n = 0, over = 0;
    for (size_t i = 0; i < err.err.size(); ++i) {
        if (!err.valid[i]) continue;
        ++n;
        if (err.err[i] > delta) ++over;
    }
    if (n == 0) throw ConfigError("sigma over an empty error field");
    return 100.0 * static_cast<double>(over) / static_cast<double>(n);
}

double MetricAccum::sigma(int delta) const {
    if (count == 0) return 0.0;
    const size_t over = delta == 1 ? exceed1 : delta == 2 ? exceed2 : exceed3;
    return 100.0 * static_cast<double>(over) / static_cast<double>(count);
}

void MetricAccum::add(double e) {
    ++count;
    err_sum += e;
    if (e > 1.0) ++exceed1;
    if (e > 2.0) ++exceed2;
    if (e > 3.0) ++exceed3;
}

void MetricAccum::merge(const MetricAccum& o) {
    count += o.count;
    err_sum += o.err_sum;
    exceed1 += o.exceed1;
    exceed2 += o.exceed2;
    exceed3 += o.exceed3;
}

void ErrorReport::merge(const ErrorReport& o) {
    see3.merge(o.see3);
    see5.merge(o.see5);
    epe.merge(o.epe);
}

ErrorReport evaluate(const DisparityField& pred, const DisparityField& gt, double d_max) {
    if (!gt.dense()) throw ConfigError("evaluation requires dense ground truth");
    const BoundaryMask boundary = boundary_mask(gt, 1.0 / d_max);
    const ErrorField e3 = see_k(pred, gt, boundary, 3, d_max);
    const ErrorField e5 = see_k(pred, gt, boundary, 5, d_max);
    const ErrorField ep = epe(pred, gt, d_max);

    ErrorReport r;
    for (size_t i = 0; i < e3.err.size(); ++i)
        if (e3.valid[i]) {
            r.see3.add(e3.err[i]);
            r.see5.add(e5.err[i]);
        }
    for (double e : ep.err) r.epe.add(e);
    return r;
}

} // namespace smx
