#include "stereomix/mixture.hpp"

#include <algorithm>
#include <cmath>

namespace smx {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

double laplace(double d, double mu, double b) {
    return std::exp(-std::abs(d - mu) / b) / (2.0 * b);
}

// Component log-weights of the mixture at d.
void component_logs(const MixtureParams& p, double d, double& t1, double& t2) {
    t1 = std::log(p.pi) - std::log(2.0 * p.b1) - std::abs(d - p.mu1) / p.b1;
    t2 = std::log1p(-p.pi) - std::log(2.0 * p.b2) - std::abs(d - p.mu2) / p.b2;
}

// Adaptive Simpson on one panel. fa/fm/fb are f at the endpoints and midpoint,
// `whole` the Simpson estimate over [a,b].
template <class F>
double refine(const F& f, double a, double b, double fa, double fm, double fb,
              double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Composite Simpson over the truncation window, segments split at the mode
// kinks, >= 2048 base intervals overall, each panel refined adaptively so that
// modes much narrower than the window are still integrated accurately.
template <class F>
double quadrature(const MixtureParams& p, const F& f) {
    const double mu_lo = std::min(p.mu1, p.mu2);
    const double mu_hi = std::max(p.mu1, p.mu2);
    const double bmax = std::max(p.b1, p.b2);
    const double lo = mu_lo - 20.0 * bmax;
    const double hi = mu_hi + 20.0 * bmax;

    double cuts[4] = {lo, mu_lo, mu_hi, hi};
    const double total = hi - lo;
    double sum = 0.0;
    for (int seg = 0; seg < 3; ++seg) {
        const double a = cuts[seg], b = cuts[seg + 1];
        if (!(b > a)) continue;
        long n = std::lround(std::ceil(2048.0 * (b - a) / total)) + 2;
        n += n & 1; // even interval count
        const double h = (b - a) / static_cast<double>(n);
        const double panel_tol = 1e-10 * (b - a) / total;
        double fa = f(a);
        for (long i = 0; i < n; i += 2) {
            const double x0 = a + h * static_cast<double>(i);
            const double x2 = (i + 2 == n) ? b : a + h * static_cast<double>(i + 2);
            const double xm = 0.5 * (x0 + x2);
            const double fm = f(xm), fb = f(x2);
            const double whole = (x2 - x0) / 6.0 * (fa + 4.0 * fm + fb);
            sum += refine(f, x0, x2, fa, fm, fb, whole, panel_tol, 48);
            fa = fb;
        }
    }
    return sum;
}

} // namespace

double pdf(const MixtureParams& p, double d) {
    return p.pi * laplace(d, p.mu1, p.b1) + (1.0 - p.pi) * laplace(d, p.mu2, p.b2);
}

double log_pdf(const MixtureParams& p, double d) {
    double t1, t2;
    component_logs(p, d, t1, t2);
    const double m = std::max(t1, t2);
    return m + std::log(std::exp(t1 - m) + std::exp(t2 - m));
}

double nll(const MixtureParams& p, double d) { return -log_pdf(p, d); }

Grad5 nll_grad(const MixtureParams& p, double d) {
    double t1, t2;
    component_logs(p, d, t1, t2);
    const double m = std::max(t1, t2);
    const double lp = m + std::log(std::exp(t1 - m) + std::exp(t2 - m));
    const double w1 = std::exp(t1 - lp); // posterior responsibility of mode 1
    const double w2 = std::exp(t2 - lp);
    const double a1 = std::abs(d - p.mu1), a2 = std::abs(d - p.mu2);

    Grad5 g;
    g.d_pi = -(w1 / p.pi - w2 / (1.0 - p.pi));
    g.d_mu1 = -w1 * sign(d - p.mu1) / p.b1;
    g.d_mu2 = -w2 * sign(d - p.mu2) / p.b2;
    g.d_b1 = w1 * (1.0 / p.b1 - a1 / (p.b1 * p.b1));
    g.d_b2 = w2 * (1.0 / p.b2 - a2 / (p.b2 * p.b2));
    return g;
}

double select_mode(const MixtureParams& p) {
    return pdf(p, p.mu1) >= pdf(p, p.mu2) ? p.mu1 : p.mu2;
}

double entropy(const MixtureParams& p) {
    return quadrature(p, [&p](double x) {
        const double v = pdf(p, x);
        return v > 0.0 ? -v * std::log(v) : 0.0;
    });
}

double pdf_mass(const MixtureParams& p) {
    return quadrature(p, [&p](double x) { return pdf(p, x); });
}

double unimodal_nll(const UnimodalParams& p, double d) {
    return std::log(2.0 * p.b) + std::abs(d - p.mu) / p.b;
}

Grad2 unimodal_grad(const UnimodalParams& p, double d) {
    const double a = std::abs(d - p.mu);
    return {-sign(d - p.mu) / p.b, 1.0 / p.b - a / (p.b * p.b)};
}

double unimodal_entropy(const UnimodalParams& p) { return 1.0 + std::log(2.0 * p.b); }

double l1_loss(double pred, double d) { return std::abs(pred - d); }

double l1_grad(double pred, double d) { return sign(pred - d); }

} // namespace smx
