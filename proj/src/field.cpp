#include "stereomix/field.hpp"

#include <cmath>
#include <cstring>

#include "stereomix/common.hpp"
#include "stereomix/rng.hpp"

namespace smx {

namespace {

// z[n,out] = a[n,in] . w[out,in]^T + b
void affine_forward(const double* a, int n, int in, const double* w, const double* b,
                    int out, double* z) {
    for (int i = 0; i < n; ++i) {
        const double* ai = a + static_cast<size_t>(i) * in;
        double* zi = z + static_cast<size_t>(i) * out;
        for (int o = 0; o < out; ++o) {
            const double* wo = w + static_cast<size_t>(o) * in;
            double acc = b[o];
            for (int k = 0; k < in; ++k) acc += ai[k] * wo[k];
            zi[o] = acc;
        }
    }
}

double apply_act(Activation act, double z) {
    switch (act) {
    case Activation::Sine: return std::sin(z);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Identity: return z;
    }
    return z;
}

double act_deriv(Activation act, double z, double y) {
    switch (act) {
    case Activation::Sine: return std::cos(z);
    case Activation::Sigmoid: return y * (1.0 - y);
    case Activation::Identity: return 1.0;
    }
    return 1.0;
}

} // namespace

CornerWeights corner_weights(int width, int height, QueryPoint q) {
    if (!(q.x >= 0.0 && q.x <= width - 1 && q.y >= 0.0 && q.y <= height - 1))
        throw DomainError("query out of domain");
    int x0 = static_cast<int>(q.x);
    int y0 = static_cast<int>(q.y);
    if (x0 > width - 2) x0 = width - 2;
    if (y0 > height - 2) y0 = height - 2;
    const double fx = q.x - x0;
    const double fy = q.y - y0;
    CornerWeights c;
    c.x0 = x0;
    c.y0 = y0;
    c.x1 = x0 + 1;
    c.y1 = y0 + 1;
    c.w00 = (1.0 - fx) * (1.0 - fy);
    c.w10 = fx * (1.0 - fy);
    c.w01 = (1.0 - fx) * fy;
    c.w11 = fx * fy;
    return c;
}

void interp(const FeatureGrid& grid, QueryPoint q, std::span<double> out) {
    const CornerWeights c = corner_weights(grid.width, grid.height, q);
    const double* p00 = grid.row_ptr(c.x0, c.y0);
    const double* p10 = grid.row_ptr(c.x1, c.y0);
    const double* p01 = grid.row_ptr(c.x0, c.y1);
    const double* p11 = grid.row_ptr(c.x1, c.y1);
    for (int k = 0; k < grid.channels; ++k)
        out[k] = c.w00 * p00[k] + c.w10 * p10[k] + c.w01 * p01[k] + c.w11 * p11[k];
}

std::vector<double> interp(const FeatureGrid& grid, QueryPoint q) {
    std::vector<double> out(grid.channels);
    interp(grid, q, out);
    return out;
}

void interp_backward(const FeatureGrid& grid, QueryPoint q,
                     std::span<const double> upstream, Tensor& grad) {
    const CornerWeights c = corner_weights(grid.width, grid.height, q);
    double* p00 = grad.row_ptr(c.x0, c.y0);
    double* p10 = grad.row_ptr(c.x1, c.y0);
    double* p01 = grad.row_ptr(c.x0, c.y1);
    double* p11 = grad.row_ptr(c.x1, c.y1);
    for (int k = 0; k < grid.channels; ++k) {
        p00[k] += c.w00 * upstream[k];
        p10[k] += c.w10 * upstream[k];
        p01[k] += c.w01 * upstream[k];
        p11[k] += c.w11 * upstream[k];
    }
}

void MlpHead::zero_grad() {
    for (auto& l : layers) {
        std::fill(l.gw.begin(), l.gw.end(), 0.0);
        std::fill(l.gb.begin(), l.gb.end(), 0.0);
    }
}

MlpHead make_head(int feature_dim, int out_dim, double width_factor) {
    const int ref[4] = {1024, 512, 256, 128};
    std::vector<int> widths;
    widths.push_back(feature_dim);
    for (int r : ref) {
        int w = static_cast<int>(std::lround(r * width_factor));
        widths.push_back(w < 1 ? 1 : w);
    }
    widths.push_back(out_dim);

    MlpHead head;
    for (size_t i = 0; i + 1 < widths.size(); ++i) {
        MlpLayer l;
        l.in_dim = widths[i];
        l.out_dim = widths[i + 1];
        l.act = (i + 2 == widths.size()) ? Activation::Sigmoid : Activation::Sine;
        l.w.assign(static_cast<size_t>(l.in_dim) * l.out_dim, 0.0);
        l.b.assign(l.out_dim, 0.0);
        l.gw.assign(l.w.size(), 0.0);
        l.gb.assign(l.b.size(), 0.0);
        head.layers.push_back(std::move(l));
    }
    return head;
}

void sine_init(MlpHead& head, uint64_t seed) {
    Rng rng(seed, /*stream=*/0x68656164u);
    const double omega = 30.0;
    for (size_t i = 0; i < head.layers.size(); ++i) {
        MlpLayer& l = head.layers[i];
        const double bound = (i == 0) ? 1.0 / l.in_dim
                                      : std::sqrt(6.0 / l.in_dim) / omega;
        for (double& w : l.w) w = rng.uniform(-bound, bound);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
}

void head_forward(const MlpHead& head, const double* feats, int n, double* raw,
                  HeadCache* cache) {
    const size_t L = head.layers.size();
    std::vector<double> cur(feats, feats + static_cast<size_t>(n) * head.input_dim());
    if (cache) {
        cache->n = n;
        cache->act.assign(L + 1, {});
        cache->pre.assign(L, {});
        cache->act[0] = cur;
    }
    std::vector<double> z;
    for (size_t li = 0; li < L; ++li) {
        const MlpLayer& l = head.layers[li];
        z.resize(static_cast<size_t>(n) * l.out_dim);
        affine_forward(cur.data(), n, l.in_dim, l.w.data(), l.b.data(), l.out_dim,
                       z.data());
        if (cache) cache->pre[li] = z;
        cur.resize(z.size());
        for (size_t k = 0; k < z.size(); ++k) cur[k] = apply_act(l.act, z[k]);
        if (cache) cache->act[li + 1] = cur;
    }
    std::memcpy(raw, cur.data(), cur.size() * sizeof(double));
}

std::array<double, 5> head_forward_one(const MlpHead& head, std::span<const double> feat) {
    std::array<double, 5> raw{};
    head_forward(head, feat.data(), 1, raw.data(), nullptr);
    return raw;
}

void head_backward(MlpHead& head, const HeadCache& cache, const double* upstream,
                   double* feat_grad) {
    const int n = cache.n;
    const size_t L = head.layers.size();
    std::vector<double> dz(upstream,
                           upstream + static_cast<size_t>(n) * head.output_dim());
    for (size_t li = L; li-- > 0;) {
        MlpLayer& l = head.layers[li];
        const std::vector<double>& pre = cache.pre[li];
        const std::vector<double>& out_act = cache.act[li + 1];
        const std::vector<double>& in_act = cache.act[li];
        for (size_t k = 0; k < dz.size(); ++k)
            dz[k] *= act_deriv(l.act, pre[k], out_act[k]);

        // gw += dz^T . in_act ; gb += column sums of dz
        for (int i = 0; i < n; ++i) {
            const double* ai = in_act.data() + static_cast<size_t>(i) * l.in_dim;
            const double* di = dz.data() + static_cast<size_t>(i) * l.out_dim;
            for (int o = 0; o < l.out_dim; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                double* gw = l.gw.data() + static_cast<size_t>(o) * l.in_dim;
                for (int k = 0; k < l.in_dim; ++k) gw[k] += d * ai[k];
                l.gb[o] += d;
            }
        }

        const bool need_input_grad = li > 0 || feat_grad != nullptr;
        if (!need_input_grad) break;
        std::vector<double> dprev(static_cast<size_t>(n) * l.in_dim, 0.0);
        for (int i = 0; i < n; ++i) {
            const double* di = dz.data() + static_cast<size_t>(i) * l.out_dim;
            double* dp = dprev.data() + static_cast<size_t>(i) * l.in_dim;
            for (int o = 0; o < l.out_dim; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                const double* wo = l.w.data() + static_cast<size_t>(o) * l.in_dim;
                for (int k = 0; k < l.in_dim; ++k) dp[k] += d * wo[k];
            }
        }
        dz = std::move(dprev);
    }
    if (feat_grad)
        std::memcpy(feat_grad, dz.data(), dz.size() * sizeof(double));
}

MixtureParams decode_params(const std::array<double, 5>& raw) {
    MixtureParams p;
    p.pi = std::clamp(raw[0], kPiClamp, 1.0 - kPiClamp);
    p.mu1 = raw[1];
    p.b1 = kBMin + raw[2] * (kBMax - kBMin);
    p.mu2 = raw[3];
    p.b2 = kBMin + raw[4] * (kBMax - kBMin);
    return p;
}

UnimodalParams decode_unimodal(const std::array<double, 2>& raw) {
    return {raw[0], kBMin + raw[1] * (kBMax - kBMin)};
}

std::array<double, 5> decode_backward(const std::array<double, 5>& raw, const Grad5& g) {
    const bool pi_free = raw[0] > kPiClamp && raw[0] < 1.0 - kPiClamp;
    return {pi_free ? g.d_pi : 0.0, g.d_mu1, g.d_b1 * (kBMax - kBMin), g.d_mu2,
            g.d_b2 * (kBMax - kBMin)};
}

std::array<double, 2> decode_unimodal_backward(const std::array<double, 2>&,
                                               const Grad2& g) {
    return {g.d_mu, g.d_b * (kBMax - kBMin)};
}

} // namespace smx
