#include "stereomix/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stereomix/common.hpp"

namespace smx {

namespace {

constexpr double kLeakySlope = 0.1;

// Stream ids for the stateless per-step randomness.
constexpr uint64_t kStreamShuffle = 0x7368756646ull;
constexpr uint64_t kStreamAugment = 0x6175671ull;
constexpr uint64_t kStreamCrop = 0x63726f70ull;
constexpr uint64_t kStreamPoints = 0x707473ull;

double leaky(double x) { return x > 0.0 ? x : kLeakySlope * x; }
double leaky_deriv(double x) { return x > 0.0 ? 1.0 : kLeakySlope; }

int out_side(int in, int stride) { return stride == 1 ? in : in / 2; }

// w layout: [oc][ky][kx][ic], channels innermost to match Tensor rows.
size_t widx(int oc, int ky, int kx, int in_ch) {
    return ((static_cast<size_t>(oc) * 3 + ky) * 3 + kx) * in_ch;
}

Tensor conv_forward(const ConvLayer& l, const Tensor& in) {
    if (in.channels != l.in_ch) throw ShapeError("conv input channel mismatch");
    if (l.stride == 2 && ((in.width | in.height) & 1))
        throw ShapeError("stride-2 conv needs even input sides");
    const int ow = out_side(in.width, l.stride), oh = out_side(in.height, l.stride);
    Tensor out(ow, oh, l.out_ch);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double* orow = out.row_ptr(ox, oy);
            for (int oc = 0; oc < l.out_ch; ++oc) orow[oc] = l.b[oc];
            for (int ky = 0; ky < 3; ++ky) {
                const int iy = oy * l.stride + ky - 1;
                if (iy < 0 || iy >= in.height) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int ix = ox * l.stride + kx - 1;
                    if (ix < 0 || ix >= in.width) continue;
                    const double* irow = in.row_ptr(ix, iy);
                    for (int oc = 0; oc < l.out_ch; ++oc) {
                        const double* w = l.w.data() + widx(oc, ky, kx, l.in_ch);
                        double acc = 0.0;
                        for (int c = 0; c < l.in_ch; ++c) acc += w[c] * irow[c];
                        orow[oc] += acc;
                    }
                }
            }
        }
    }
    return out;
}

// g_pre: gradient at the conv output (pre-activation). Accumulates gw/gb and,
// when g_in != nullptr, the input gradient.
void conv_backward(ConvLayer& l, const Tensor& in, const Tensor& g_pre, Tensor* g_in) {
    for (int oy = 0; oy < g_pre.height; ++oy) {
        for (int ox = 0; ox < g_pre.width; ++ox) {
            const double* grow = g_pre.row_ptr(ox, oy);
            for (int oc = 0; oc < l.out_ch; ++oc) l.gb[oc] += grow[oc];
            for (int ky = 0; ky < 3; ++ky) {
                const int iy = oy * l.stride + ky - 1;
                if (iy < 0 || iy >= in.height) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const int ix = ox * l.stride + kx - 1;
                    if (ix < 0 || ix >= in.width) continue;
                    const double* irow = in.row_ptr(ix, iy);
                    double* girow = g_in ? g_in->row_ptr(ix, iy) : nullptr;
                    for (int oc = 0; oc < l.out_ch; ++oc) {
                        const double d = grow[oc];
                        if (d == 0.0) continue;
                        const double* w = l.w.data() + widx(oc, ky, kx, l.in_ch);
                        double* gw = l.gw.data() + widx(oc, ky, kx, l.in_ch);
                        if (girow) {
                            for (int c = 0; c < l.in_ch; ++c) {
                                gw[c] += d * irow[c];
                                girow[c] += d * w[c];
                            }
                        } else {
                            for (int c = 0; c < l.in_ch; ++c) gw[c] += d * irow[c];
                        }
                    }
                }
            }
        }
    }
}

Tensor upsample2(const Tensor& in) {
    Tensor out(in.width * 2, in.height * 2, in.channels);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            const double* s = in.row_ptr(x / 2, y / 2);
            double* d = out.row_ptr(x, y);
            std::copy(s, s + in.channels, d);
        }
    return out;
}

Tensor upsample2_backward(const Tensor& g_out) {
    Tensor g_in(g_out.width / 2, g_out.height / 2, g_out.channels);
    for (int y = 0; y < g_out.height; ++y)
        for (int x = 0; x < g_out.width; ++x) {
            const double* s = g_out.row_ptr(x, y);
            double* d = g_in.row_ptr(x / 2, y / 2);
            for (int c = 0; c < g_out.channels; ++c) d[c] += s[c];
        }
    return g_in;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    Tensor out(a.width, a.height, a.channels + b.channels);
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            const double* pa = a.row_ptr(x, y);
            const double* pb = b.row_ptr(x, y);
            double* po = out.row_ptr(x, y);
            std::copy(pa, pa + a.channels, po);
            std::copy(pb, pb + b.channels, po + a.channels);
        }
    return out;
}

void split_channels(const Tensor& g, int ca, Tensor& ga, Tensor& gb) {
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            const double* pg = g.row_ptr(x, y);
            double* pa = ga.row_ptr(x, y);
            double* pb = gb.row_ptr(x, y);
            for (int c = 0; c < ca; ++c) pa[c] += pg[c];
            for (int c = ca; c < g.channels; ++c) pb[c - ca] += pg[c];
        }
}

Tensor apply_leaky(const Tensor& pre) {
    Tensor out = pre;
    for (double& v : out.data) v = leaky(v);
    return out;
}

Tensor leaky_backward(const Tensor& g_act, const Tensor& pre) {
    Tensor g = g_act;
    for (size_t i = 0; i < g.data.size(); ++i) g.data[i] *= leaky_deriv(pre.data[i]);
    return g;
}

} // namespace

void ConvNet::zero_grad() {
    for (auto* group : {&enc, &dec})
        for (ConvLayer& l : *group) {
            std::fill(l.gw.begin(), l.gw.end(), 0.0);
            std::fill(l.gb.begin(), l.gb.end(), 0.0);
        }
}

ConvNet make_convnet(int n_down, int base_ch, int out_ch) {
    if (n_down < 0 || base_ch < 1 || out_ch < 1)
        throw ConfigError("invalid backbone configuration");
    ConvNet net;
    net.n_down = n_down;
    net.base_ch = base_ch;
    net.out_ch = out_ch;
    const int deep = n_down > 0 ? base_ch * 2 : base_ch;

    auto add = [](std::vector<ConvLayer>& v, int in, int out, int stride) {
        ConvLayer l;
        l.in_ch = in;
        l.out_ch = out;
        l.stride = stride;
        l.w.assign(static_cast<size_t>(out) * 9 * in, 0.0);
        l.b.assign(out, 0.0);
        l.gw.assign(l.w.size(), 0.0);
        l.gb.assign(l.b.size(), 0.0);
        v.push_back(std::move(l));
    };

    add(net.enc, 6, base_ch, 1);
    for (int i = 1; i <= n_down; ++i) add(net.enc, i == 1 ? base_ch : deep, deep, 2);
    for (int j = 0; j < n_down; ++j) {
        const int level = n_down - 1 - j; // resolution level of this stage
        const int skip = level == 0 ? base_ch : deep;
        add(net.dec, deep + skip, deep, 1);
    }
    add(net.dec, deep, out_ch, 1); // linear output conv
    return net;
}

void convnet_init(ConvNet& net, uint64_t seed) {
    int idx = 0;
    for (auto* group : {&net.enc, &net.dec})
        for (ConvLayer& l : *group) {
            Rng rng(seed, mix_u64(0x636f6e76ull, static_cast<uint64_t>(idx++)));
            const double bound = std::sqrt(6.0 / (9.0 * l.in_ch));
            for (double& w : l.w) w = rng.uniform(-bound, bound);
            std::fill(l.b.begin(), l.b.end(), 0.0);
        }
}

size_t NetCache::value_count() const {
    size_t n = 0;
    for (const Tensor& t : conv_in) n += t.size();
    for (const Tensor& t : conv_pre) n += t.size();
    return n;
}

FeatureGrid net_forward(const ConvNet& net, const StereoInput& input, NetCache* cache) {
    if (input.channels != 6) throw ShapeError("stereo input must have 6 channels");
    const int div = 1 << net.n_down;
    if (input.width % div || input.height % div || input.width < div || input.height < div)
        throw ShapeError("input sides must be divisible by 2^n_down");
    if (cache) {
        cache->conv_in.clear();
        cache->conv_pre.clear();
    }

    auto run_conv = [&](const ConvLayer& l, const Tensor& in, bool act) {
        Tensor pre = conv_forward(l, in);
        Tensor out = act ? apply_leaky(pre) : pre;
        if (cache) {
            cache->conv_in.push_back(in);
            cache->conv_pre.push_back(std::move(pre));
        }
        return out;
    };

    std::vector<Tensor> skips; // encoder activations per level
    Tensor h = run_conv(net.enc[0], input, true);
    skips.push_back(h);
    for (int i = 1; i <= net.n_down; ++i) {
        h = run_conv(net.enc[i], h, true);
        skips.push_back(h);
    }
    for (int j = 0; j < net.n_down; ++j) {
        const int level = net.n_down - 1 - j;
        Tensor c = concat_channels(upsample2(h), skips[level]);
        h = run_conv(net.dec[j], c, true);
    }
    return run_conv(net.dec[net.n_down], h, false);
}

void net_backward(ConvNet& net, const NetCache& cache, const Tensor& grid_grad) {
    const int K = net.n_down;
    const size_t n_conv = cache.conv_pre.size();
    if (n_conv != static_cast<size_t>(2 * K + 2))
        throw ShapeError("cache does not match backbone layout");

    // Final linear conv.
    size_t ci = n_conv - 1;
    Tensor g_h(cache.conv_in[ci].width, cache.conv_in[ci].height,
               cache.conv_in[ci].channels);
    conv_backward(net.dec[K], cache.conv_in[ci], grid_grad, &g_h);

    // Gradients flowing into each encoder activation (skip + chain).
    std::vector<Tensor> g_skip(K + 1);

    for (int j = K - 1; j >= 0; --j) {
        ci = static_cast<size_t>(K + 1 + j);
        const int level = K - 1 - j;
        const Tensor& pre = cache.conv_pre[ci];
        const Tensor& cin = cache.conv_in[ci];
        Tensor g_pre = leaky_backward(g_h, pre);
        Tensor g_cat(cin.width, cin.height, cin.channels);
        conv_backward(net.dec[j], cin, g_pre, &g_cat);

        const int up_ch = cin.channels - (level == 0 ? net.base_ch : cin.channels / 2);
        // channels: [upsampled | skip]
        const int skip_ch = cin.channels - up_ch;
        Tensor g_up(cin.width, cin.height, up_ch);
        Tensor& gs = g_skip[level];
        if (gs.size() == 0) gs = Tensor(cin.width, cin.height, skip_ch);
        split_channels(g_cat, up_ch, g_up, gs);
        g_h = upsample2_backward(g_up);
    }
    // g_h now feeds the deepest encoder activation.
    if (g_skip[K].size() == 0)
        g_skip[K] = Tensor(g_h.width, g_h.height, g_h.channels);
    for (size_t i = 0; i < g_h.data.size(); ++i) g_skip[K].data[i] += g_h.data[i];

    for (int i = K; i >= 0; --i) {
        ci = static_cast<size_t>(i);
        const Tensor& pre = cache.conv_pre[ci];
        const Tensor& cin = cache.conv_in[ci];
        Tensor g_pre = leaky_backward(g_skip[i], pre);
        if (i == 0) {
            conv_backward(net.enc[0], cin, g_pre, nullptr);
        } else {
            Tensor g_in(cin.width, cin.height, cin.channels);
            conv_backward(net.enc[i], cin, g_pre, &g_in);
            if (g_skip[i - 1].size() == 0)
                g_skip[i - 1] = std::move(g_in);
            else
                for (size_t k = 0; k < g_in.data.size(); ++k)
                    g_skip[i - 1].data[k] += g_in.data[k];
        }
    }
}

std::vector<ParamRef> collect_params(ConvNet& net, MlpHead& head) {
    std::vector<ParamRef> refs;
    for (auto* group : {&net.enc, &net.dec})
        for (ConvLayer& l : *group) {
            refs.push_back({&l.w, &l.gw});
            refs.push_back({&l.b, &l.gb});
        }
    for (MlpLayer& l : head.layers) {
        refs.push_back({&l.w, &l.gw});
        refs.push_back({&l.b, &l.gb});
    }
    return refs;
}

std::vector<const std::vector<double>*> collect_weights(const ConvNet& net,
                                                        const MlpHead& head) {
    std::vector<const std::vector<double>*> refs;
    for (const auto* group : {&net.enc, &net.dec})
        for (const ConvLayer& l : *group) {
            refs.push_back(&l.w);
            refs.push_back(&l.b);
        }
    for (const MlpLayer& l : head.layers) {
        refs.push_back(&l.w);
        refs.push_back(&l.b);
    }
    return refs;
}

void adam_init(AdamState& st, const std::vector<ParamRef>& params) {
    st.step = 0;
    st.m.clear();
    st.v.clear();
    for (const ParamRef& p : params) {
        st.m.emplace_back(p.w->size(), 0.0);
        st.v.emplace_back(p.w->size(), 0.0);
    }
}

void adam_step(AdamState& st, const std::vector<ParamRef>& params, double lr) {
    if (st.m.size() != params.size()) throw ShapeError("adam state size mismatch");
    ++st.step;
    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (size_t i = 0; i < params.size(); ++i) {
        std::vector<double>& w = *params[i].w;
        const std::vector<double>& g = *params[i].g;
        std::vector<double>& m = st.m[i];
        std::vector<double>& v = st.v[i];
        if (w.size() != g.size() || w.size() != m.size())
            throw ShapeError("adam buffer shape mismatch");
        for (size_t k = 0; k < w.size(); ++k) {
            m[k] = st.beta1 * m[k] + (1.0 - st.beta1) * g[k];
            v[k] = st.beta2 * v[k] + (1.0 - st.beta2) * g[k] * g[k];
            const double mh = m[k] / c1;
            const double vh = v[k] / c2;
            w[k] -= lr * mh / (std::sqrt(vh) + st.eps);
        }
    }
}

int head_out_dim(HeadKind kind) {
    switch (kind) {
    case HeadKind::Bimodal: return 5;
    case HeadKind::Unimodal: return 2;
    case HeadKind::PointL1: return 1;
    }
    return 5;
}

const char* head_kind_name(HeadKind kind) {
    switch (kind) {
    case HeadKind::Bimodal: return "bimodal";
    case HeadKind::Unimodal: return "unimodal";
    case HeadKind::PointL1: return "l1";
    }
    return "?";
}

Model make_model(HeadKind kind, int n_down, int base_ch, int feature_dim,
                 double width_factor, double d_max, uint64_t seed) {
    Model m;
    m.kind = kind;
    m.d_max = d_max;
    m.width_factor = width_factor;
    m.net = make_convnet(n_down, base_ch, feature_dim);
    convnet_init(m.net, mix_u64(seed, 0x6e6574ull));
    m.head = make_head(feature_dim, head_out_dim(kind), width_factor);
    sine_init(m.head, mix_u64(seed, 0x68656164ull));
    return m;
}

void validate(const TrainConfig& cfg) {
    if (cfg.points_per_crop < 2 || (cfg.points_per_crop & 1))
        throw ConfigError("points per crop must be even and >= 2");
    if (cfg.crop < 2) throw ConfigError("crop size too small");
    if (cfg.epochs < 0) throw ConfigError("negative epoch count");
    if (!(cfg.lr >= 0.0)) throw ConfigError("invalid learning rate");
    if (cfg.sr_factor != 1 && cfg.sr_factor != 2 && cfg.sr_factor != 4)
        throw ConfigError("super-resolution factor must be 1, 2 or 4");
    if (cfg.rho < 0) throw ConfigError("negative dilation kernel");
    if (cfg.query_batch < 1) throw ConfigError("query batch must be >= 1");
}

namespace {

// Loss value and d(loss)/d(raw outputs) for one point.
double point_loss(HeadKind kind, const double* raw, double d, double* draw) {
    switch (kind) {
    case HeadKind::Bimodal: {
        const std::array<double, 5> r{raw[0], raw[1], raw[2], raw[3], raw[4]};
        const MixtureParams p = decode_params(r);
        const Grad5 g = nll_grad(p, d);
        const std::array<double, 5> dr = decode_backward(r, g);
        std::copy(dr.begin(), dr.end(), draw);
        return nll(p, d);
    }
    case HeadKind::Unimodal: {
        const std::array<double, 2> r{raw[0], raw[1]};
        const UnimodalParams p = decode_unimodal(r);
        const Grad2 g = unimodal_grad(p, d);
        const std::array<double, 2> dr = decode_unimodal_backward(r, g);
        draw[0] = dr[0];
        draw[1] = dr[1];
        return unimodal_nll(p, d);
    }
    case HeadKind::PointL1: {
        draw[0] = l1_grad(raw[0], d);
        return l1_loss(raw[0], d);
    }
    }
    return 0.0;
}

// GT-grid continuous coordinate -> feature-grid coordinate, clamped to Omega.
QueryPoint to_feature_coords(double x, double y, double sx, double sy, int w, int h) {
    double fx = (x + 0.5) / sx - 0.5;
    double fy = (y + 0.5) / sy - 0.5;
    fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    return {fx, fy};
}

DisparityField crop_field(const DisparityField& gt, int x0, int y0, int w, int h) {
    DisparityField out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = gt.at(x0 + x, y0 + y);
    return out;
}

Tensor crop_pair(const Tensor& left, const Tensor& right, int x0, int y0, int side) {
    Tensor out(side, side, 6);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            const double* pl = left.row_ptr(x0 + x, y0 + y);
            const double* pr = right.row_ptr(x0 + x, y0 + y);
            double* po = out.row_ptr(x, y);
            std::copy(pl, pl + 3, po);
            std::copy(pr, pr + 3, po + 3);
        }
    return out;
}

} // namespace

StereoInput concat_stereo(const Tensor& left, const Tensor& right) {
    if (!left.same_shape(right) || left.channels != 3)
        throw ShapeError("stereo pair must be two equally sized RGB images");
    return concat_channels(left, right);
}

TrainResult train(Model& model, AdamState& adam, const std::vector<StereoSample>& dataset,
                  const TrainConfig& cfg, int start_epoch,
                  const std::function<void(int, double)>& on_epoch) {
    validate(cfg);
    if (dataset.empty()) throw ConfigError("empty training dataset");
    const int n = static_cast<int>(dataset.size());
    const int N = cfg.points_per_crop;
    const int s_eff = cfg.gt_at_base ? 1 : cfg.sr_factor;
    const int D = model.net.out_ch;

    for (const StereoSample& s : dataset) {
        if (s.sr_factor != cfg.sr_factor)
            throw ConfigError("dataset super-resolution factor disagrees with config");
        if (cfg.crop > s.left.width || cfg.crop > s.left.height)
            throw ConfigError("crop larger than image");
    }

    std::vector<ParamRef> params = collect_params(model.net, model.head);
    if (adam.m.empty()) adam_init(adam, params);

    TrainResult result;
    std::vector<double> feats(static_cast<size_t>(N) * D);
    std::vector<double> raw(static_cast<size_t>(N) * head_out_dim(model.kind));
    std::vector<double> upstream(raw.size());
    std::vector<double> feat_grad(feats.size());

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(cfg.seed, mix_u64(kStreamShuffle, static_cast<uint64_t>(epoch)));
        for (int i = n - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(static_cast<uint64_t>(i) + 1)]);

        double epoch_loss = 0.0;
        for (int k = 0; k < n; ++k) {
            const uint64_t step = static_cast<uint64_t>(epoch) * n + k;
            const StereoSample* sample = &dataset[order[k]];

            StereoSample augmented;
            if (cfg.augment) {
                Rng aug_rng(cfg.seed, mix_u64(kStreamAugment, step));
                AugmentFlags flags;
                flags.chromatic = true;
                flags.hflip = aug_rng.uniform() < 0.5;
                flags.vflip = aug_rng.uniform() < 0.5;
                augmented = augment(*sample, aug_rng, flags);
                sample = &augmented;
            }

            DisparityField gt = cfg.gt_at_base && cfg.sr_factor > 1
                                    ? nearest_downsample(sample->gt, cfg.sr_factor)
                                    : sample->gt;

            Rng crop_rng(cfg.seed, mix_u64(kStreamCrop, step));
            const int cx = static_cast<int>(
                crop_rng.uniform_int(static_cast<uint64_t>(sample->left.width - cfg.crop) + 1));
            const int cy = static_cast<int>(
                crop_rng.uniform_int(static_cast<uint64_t>(sample->left.height - cfg.crop) + 1));
            const Tensor input = crop_pair(sample->left, sample->right, cx, cy, cfg.crop);
            const DisparityField gt_crop =
                crop_field(gt, cx * s_eff, cy * s_eff, cfg.crop * s_eff, cfg.crop * s_eff);

            NetCache cache;
            const FeatureGrid grid = net_forward(model.net, input, &cache);

            Rng pts_rng(cfg.seed, mix_u64(kStreamPoints, step));
            std::vector<SamplePoint> pts;
            if (cfg.sampling == SamplingKind::Dda) {
                BoundaryMask mask = boundary_mask(gt_crop, 1.0 / model.d_max);
                pts = dda_sample(gt_crop, dilate(mask, cfg.rho), N, pts_rng);
            } else {
                pts = uniform_sample(gt_crop, N, pts_rng);
            }

            std::vector<QueryPoint> queries(N);
            for (int i = 0; i < N; ++i) {
                queries[i] = to_feature_coords(pts[i].x, pts[i].y, s_eff, s_eff,
                                               grid.width, grid.height);
                interp(grid, queries[i], {feats.data() + static_cast<size_t>(i) * D,
                                          static_cast<size_t>(D)});
            }

            HeadCache head_cache;
            const int od = head_out_dim(model.kind);
            head_forward(model.head, feats.data(), N, raw.data(), &head_cache);

            double loss = 0.0;
            for (int i = 0; i < N; ++i) {
                double* dr = upstream.data() + static_cast<size_t>(i) * od;
                loss += point_loss(model.kind, raw.data() + static_cast<size_t>(i) * od,
                                   pts[i].d, dr);
            }
            loss /= N;
            // Mean over points keeps lr independent of N.
            for (double& v : upstream) v /= N;

            model.net.zero_grad();
            model.head.zero_grad();
            head_backward(model.head, head_cache, upstream.data(), feat_grad.data());
            Tensor grid_grad(grid.width, grid.height, grid.channels);
            for (int i = 0; i < N; ++i)
                interp_backward(grid, queries[i],
                                {feat_grad.data() + static_cast<size_t>(i) * D,
                                 static_cast<size_t>(D)},
                                grid_grad);
            net_backward(model.net, cache, grid_grad);
            adam_step(adam, params, cfg.lr);

            epoch_loss += loss;
        }
        epoch_loss /= n;
        result.epoch_loss.push_back(epoch_loss);
        if (on_epoch) on_epoch(epoch, epoch_loss);
    }
    return result;
}

InferResult infer_grid(const Model& model, const StereoInput& input, int out_w,
                       int out_h, int query_batch, bool with_uncertainty) {
    if (out_w < 1 || out_h < 1) throw ConfigError("output resolution must be >= 1");
    if (query_batch < 1) throw ConfigError("query batch must be >= 1");

    NetCache cache;
    const FeatureGrid grid = net_forward(model.net, input, &cache);

    InferResult res;
    res.backbone_cache_values = cache.value_count() + grid.size();
    res.disparity = DisparityField(out_w, out_h);
    const bool bimodal = model.kind == HeadKind::Bimodal;
    if (with_uncertainty && model.kind != HeadKind::PointL1)
        res.uncertainty.assign(static_cast<size_t>(out_w) * out_h, 0.0);
    if (bimodal) {
        res.pi.assign(static_cast<size_t>(out_w) * out_h, 0.0);
        res.mu1.assign(static_cast<size_t>(out_w) * out_h, 0.0);
        res.mu2.assign(static_cast<size_t>(out_w) * out_h, 0.0);
    }

    const double sx = static_cast<double>(out_w) / input.width;
    const double sy = static_cast<double>(out_h) / input.height;
    const int D = model.net.out_ch;
    const int od = head_out_dim(model.kind);
    const size_t total = static_cast<size_t>(out_w) * out_h;

    // Fixed-capacity query buffers; resident size never exceeds query_batch.
    std::vector<double> feats(static_cast<size_t>(query_batch) * D);
    std::vector<double> raw(static_cast<size_t>(query_batch) * od);

    for (size_t base = 0; base < total; base += query_batch) {
        const int m = static_cast<int>(std::min<size_t>(query_batch, total - base));
        res.peak_query_batch = std::max(res.peak_query_batch, static_cast<size_t>(m));
        for (int t = 0; t < m; ++t) {
            const size_t idx = base + t;
            const int i = static_cast<int>(idx % out_w);
            const int j = static_cast<int>(idx / out_w);
            const QueryPoint q = to_feature_coords(i, j, sx, sy, grid.width, grid.height);
            interp(grid, q,
                   {feats.data() + static_cast<size_t>(t) * D, static_cast<size_t>(D)});
        }
        head_forward(model.head, feats.data(), m, raw.data(), nullptr);
        for (int t = 0; t < m; ++t) {
            const size_t idx = base + t;
            const double* r = raw.data() + static_cast<size_t>(t) * od;
            switch (model.kind) {
            case HeadKind::Bimodal: {
                const MixtureParams p = decode_params({r[0], r[1], r[2], r[3], r[4]});
                res.disparity.d[idx] = select_mode(p);
                res.pi[idx] = p.pi;
                res.mu1[idx] = p.mu1;
                res.mu2[idx] = p.mu2;
                if (!res.uncertainty.empty()) res.uncertainty[idx] = entropy(p);
                break;
            }
            case HeadKind::Unimodal: {
                const UnimodalParams p = decode_unimodal({r[0], r[1]});
                res.disparity.d[idx] = p.mu;
                if (!res.uncertainty.empty()) res.uncertainty[idx] = unimodal_entropy(p);
                break;
            }
            case HeadKind::PointL1:
                res.disparity.d[idx] = r[0];
                break;
            }
        }
    }
    return res;
}

} // namespace smx
