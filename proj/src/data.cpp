#include "stereomix/data.hpp"

#include <algorithm>
#include <cmath>

#include "stereomix/common.hpp"

namespace smx {

namespace {

constexpr uint64_t kStreamGeometry = 0x67656f6dull;
constexpr uint64_t kStreamTexture = 0x746578ull;
constexpr uint64_t kStreamPalette = 0x70616cull;

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double lattice_value(uint64_t tex_seed, int64_t ix, int64_t iy) {
    uint64_t h = mix_u64(tex_seed, mix_u64(static_cast<uint64_t>(ix) * 0x9e3779b97f4a7c15ull,
                                           static_cast<uint64_t>(iy)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Smooth value noise on an unbounded lattice; defined everywhere, so layers
// can be sampled outside the image for the shifted right view.
double value_noise(uint64_t tex_seed, double x, double y, double scale) {
    const double u = x / scale, v = y / scale;
    const double fu = std::floor(u), fv = std::floor(v);
    const int64_t i0 = static_cast<int64_t>(fu), j0 = static_cast<int64_t>(fv);
    const double tu = smoothstep(u - fu), tv = smoothstep(v - fv);
    const double a = lattice_value(tex_seed, i0, j0);
    const double b = lattice_value(tex_seed, i0 + 1, j0);
    const double c = lattice_value(tex_seed, i0, j0 + 1);
    const double d = lattice_value(tex_seed, i0 + 1, j0 + 1);
    return (a * (1.0 - tu) + b * tu) * (1.0 - tv) + (c * (1.0 - tu) + d * tu) * tv;
}

struct LayerShading {
    double scale;
    double c0[3], c1[3];
};

// Per-family texture parameter ranges are disjoint: in-domain noise scales
// live in [6, 12] base pixels, family f >= 1 in [16 + 8(f-1), 24 + 8(f-1)].
LayerShading layer_shading(uint64_t texture_seed, int family) {
    Rng rng(texture_seed, kStreamPalette);
    LayerShading s;
    if (family == 0)
        s.scale = rng.uniform(6.0, 12.0);
    else
        s.scale = rng.uniform(16.0 + 8.0 * (family - 1), 24.0 + 8.0 * (family - 1));
    for (int c = 0; c < 3; ++c) s.c0[c] = rng.uniform(0.05, 0.95);
    for (int c = 0; c < 3; ++c) s.c1[c] = rng.uniform(0.05, 0.95);
    return s;
}

void shade(const LayerShading& s, uint64_t tex_seed, double x, double y, double* rgb) {
    const double t = value_noise(tex_seed, x, y, s.scale);
    for (int c = 0; c < 3; ++c) rgb[c] = s.c0[c] + (s.c1[c] - s.c0[c]) * t;
}

void validate(const SceneConfig& cfg) {
    if (cfg.base_width < 8 || cfg.base_height < 8)
        throw ConfigError("scene too small");
    if (cfg.sr_factor != 1 && cfg.sr_factor != 2 && cfg.sr_factor != 4)
        throw ConfigError("super-resolution factor must be 1, 2 or 4");
    if (cfg.layers < 0) throw ConfigError("negative layer count");
    if (!(cfg.d_lo >= 0.0 && cfg.d_hi >= cfg.d_lo)) throw ConfigError("bad disparity range");
    if (!(cfg.d_hi <= cfg.d_max)) throw ConfigError("d_hi must not exceed d_max");
    if (!(cfg.d_hi < cfg.base_width / 4.0))
        throw ConfigError("d_hi must stay below a quarter of the image width");
    const int span = static_cast<int>(std::floor(cfg.d_hi)) -
                     static_cast<int>(std::ceil(cfg.d_lo)) + 1;
    if (span < cfg.layers + 1)
        throw ConfigError("disparity range too narrow for distinct layers");
}

Tensor box_downsample(const Tensor& hi, int s) {
    Tensor out(hi.width / s, hi.height / s, hi.channels);
    const double inv = 1.0 / (s * s);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            double* po = out.row_ptr(x, y);
            for (int yy = 0; yy < s; ++yy)
                for (int xx = 0; xx < s; ++xx) {
                    const double* ph = hi.row_ptr(x * s + xx, y * s + yy);
                    for (int c = 0; c < hi.channels; ++c) po[c] += ph[c];
                }
            for (int c = 0; c < hi.channels; ++c) po[c] *= inv;
        }
    return out;
}

Tensor mirror_x(const Tensor& t) {
    Tensor out(t.width, t.height, t.channels);
    for (int y = 0; y < t.height; ++y)
        for (int x = 0; x < t.width; ++x)
            std::copy(t.row_ptr(t.width - 1 - x, y), t.row_ptr(t.width - 1 - x, y) + t.channels,
                      out.row_ptr(x, y));
    return out;
}

Tensor flip_y(const Tensor& t) {
    Tensor out(t.width, t.height, t.channels);
    for (int y = 0; y < t.height; ++y)
        for (int x = 0; x < t.width; ++x)
            std::copy(t.row_ptr(x, t.height - 1 - y), t.row_ptr(x, t.height - 1 - y) + t.channels,
                      out.row_ptr(x, y));
    return out;
}

DisparityField mirror_x(const DisparityField& f) {
    DisparityField out(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) out.at(x, y) = f.at(f.width - 1 - x, y);
    return out;
}

DisparityField flip_y(const DisparityField& f) {
    DisparityField out(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) out.at(x, y) = f.at(x, f.height - 1 - y);
    return out;
}

} // namespace

std::vector<SceneLayer> scene_layers(const SceneConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed, kStreamGeometry);

    // K+1 distinct integer disparities, ascending; background takes the smallest.
    const int lo = static_cast<int>(std::ceil(cfg.d_lo));
    const int hi = static_cast<int>(std::floor(cfg.d_hi));
    std::vector<int> pool(hi - lo + 1);
    for (size_t i = 0; i < pool.size(); ++i) pool[i] = lo + static_cast<int>(i);
    for (int i = 0; i <= cfg.layers; ++i) {
        const size_t j = i + rng.uniform_int(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    std::vector<int> disp(pool.begin(), pool.begin() + cfg.layers + 1);
    std::sort(disp.begin(), disp.end());

    const double W = cfg.base_width, H = cfg.base_height;
    std::vector<SceneLayer> layers;
    SceneLayer bg;
    bg.x0 = -(cfg.d_hi + 2.0);
    bg.y0 = 0.0;
    bg.x1 = W + cfg.d_hi + 2.0;
    bg.y1 = H;
    bg.disparity_px = disp[0];
    bg.texture_seed = mix_u64(cfg.seed, mix_u64(kStreamTexture, 0));
    layers.push_back(bg);

    for (int k = 1; k <= cfg.layers; ++k) {
        SceneLayer l;
        const double w = rng.uniform(0.18, 0.42) * W;
        const double h = rng.uniform(0.18, 0.42) * H;
        l.x0 = rng.uniform(0.0, W - w);
        l.y0 = rng.uniform(0.0, H - h);
        l.x1 = l.x0 + w;
        l.y1 = l.y0 + h;
        l.disparity_px = disp[k];
        l.texture_seed = mix_u64(cfg.seed, mix_u64(kStreamTexture, static_cast<uint64_t>(k)));
        layers.push_back(l);
    }
    return layers;
}

StereoSample gen_scene(const SceneConfig& cfg) {
    const std::vector<SceneLayer> layers = scene_layers(cfg);
    std::vector<LayerShading> shading;
    shading.reserve(layers.size());
    for (const SceneLayer& l : layers)
        shading.push_back(layer_shading(l.texture_seed, cfg.texture_family));

    const int s = cfg.sr_factor;
    const int Wh = cfg.base_width * s, Hh = cfg.base_height * s;
    Tensor left_hi(Wh, Hh, 3), right_hi(Wh, Hh, 3);
    DisparityField gt(Wh, Hh);

    // Hi-res pixel (X,Y) samples the scene at base coordinates (X/s, Y/s);
    // nearest layers are last, so scan back to front.
    for (int Y = 0; Y < Hh; ++Y) {
        const double by = static_cast<double>(Y) / s;
        for (int X = 0; X < Wh; ++X) {
            const double bx = static_cast<double>(X) / s;
            for (size_t li = layers.size(); li-- > 0;) {
                const SceneLayer& l = layers[li];
                if (bx >= l.x0 && bx < l.x1 && by >= l.y0 && by < l.y1) {
                    shade(shading[li], l.texture_seed, bx, by, left_hi.row_ptr(X, Y));
                    gt.at(X, Y) = l.disparity_px / cfg.d_max;
                    break;
                }
            }
            for (size_t li = layers.size(); li-- > 0;) {
                const SceneLayer& l = layers[li];
                const double lx = bx + l.disparity_px; // position in the left view
                if (lx >= l.x0 && lx < l.x1 && by >= l.y0 && by < l.y1) {
                    shade(shading[li], l.texture_seed, lx, by, right_hi.row_ptr(X, Y));
                    break;
                }
            }
        }
    }

    StereoSample out;
    out.left = box_downsample(left_hi, s);
    out.right = box_downsample(right_hi, s);
    out.gt = std::move(gt);
    out.d_max = cfg.d_max;
    out.sr_factor = s;
    out.seed = cfg.seed;
    return out;
}

StereoSample augment(const StereoSample& s, Rng& rng, AugmentFlags flags) {
    StereoSample out = s;
    if (flags.chromatic) {
        const double gain = rng.uniform(0.8, 1.2);
        const double gamma = rng.uniform(0.8, 1.2);
        double ch_gain[3];
        for (double& g : ch_gain) g = rng.uniform(0.95, 1.05);
        for (Tensor* img : {&out.left, &out.right}) {
            for (int y = 0; y < img->height; ++y)
                for (int x = 0; x < img->width; ++x) {
                    double* p = img->row_ptr(x, y);
                    for (int c = 0; c < 3; ++c) {
                        double v = std::clamp(p[c] * gain, 0.0, 1.0);
                        v = std::pow(v, gamma) * ch_gain[c];
                        p[c] = std::clamp(v, 0.0, 1.0);
                    }
                }
        }
    }
    if (flags.vflip) {
        out.left = flip_y(out.left);
        out.right = flip_y(out.right);
        out.gt = flip_y(out.gt);
    }
    if (flags.hflip) {
        // Mirroring flips the disparity sign; swapping the views restores it.
        Tensor new_left = mirror_x(out.right);
        Tensor new_right = mirror_x(out.left);
        out.left = std::move(new_left);
        out.right = std::move(new_right);
        out.gt = mirror_x(out.gt);
    }
    return out;
}

uint64_t split_seed(uint64_t master_seed, int split_index, int sample_index) {
    return master_seed + static_cast<uint64_t>(split_index) * 100000ull +
           static_cast<uint64_t>(sample_index);
}

Dataset make_dataset(int n_train, int n_val, int n_test, const SceneConfig& tmpl,
                     uint64_t master_seed) {
    if (n_train < 1 || n_val < 1 || n_test < 1)
        throw ConfigError("split sizes must be >= 1");
    if (n_train > 100000 || n_val > 100000 || n_test > 100000)
        throw ConfigError("split sizes exceed the reserved seed range");

    auto build = [&](int split, int count, int family) {
        std::vector<StereoSample> v;
        v.reserve(count);
        for (int i = 0; i < count; ++i) {
            SceneConfig cfg = tmpl;
            cfg.seed = split_seed(master_seed, split, i);
            cfg.texture_family = family;
            v.push_back(gen_scene(cfg));
        }
        return v;
    };

    Dataset ds;
    ds.train = build(0, n_train, tmpl.texture_family);
    ds.val = build(1, n_val, tmpl.texture_family);
    ds.test = build(2, n_test, tmpl.texture_family);
    ds.ood = build(3, n_test, tmpl.texture_family + 1);
    return ds;
}

DisparityField nearest_downsample(const DisparityField& gt, int factor) {
    if (factor < 1 || gt.width % factor || gt.height % factor)
        throw ShapeError("field sides must be divisible by the decimation factor");
    DisparityField out(gt.width / factor, gt.height / factor);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = gt.at(x * factor, y * factor);
    return out;
}

} // namespace smx
