#pragma once

#include <cstdint>
#include <vector>

#include "stereomix/rng.hpp"
#include "stereomix/sampling.hpp"
#include "stereomix/tensor.hpp"

namespace smx {

// Procedural scene: layered fronto-parallel textured rectangles over a
// background plane, each at its own integer disparity (raw pixels).
struct SceneConfig {
    int base_width = 96, base_height = 96;
    int sr_factor = 4; // ground-truth resolution multiplier s in {1,2,4}
    int layers = 4;    // rectangle count K (background excluded)
    double d_lo = 2.0, d_hi = 20.0; // raw-pixel disparity range, integers drawn
    double d_max = 24.0;            // normalization constant
    int texture_family = 0;         // 0 = in-domain, 1 = out-of-domain
    uint64_t seed = 0;
};

struct StereoSample {
    Tensor left, right;    // base resolution RGB in [0,1]
    DisparityField gt;     // s x base resolution, values normalized by d_max
    double d_max = 0.0;
    int sr_factor = 1;
    uint64_t seed = 0;
};

// Rectangle geometry in base-pixel units; layer 0 is the background covering
// everything. Sorted far-to-near (ascending disparity).
struct SceneLayer {
    double x0, y0, x1, y1;   // half-open box [x0,x1) x [y0,y1)
    double disparity_px;     // raw pixels at base scale
    uint64_t texture_seed;
};

std::vector<SceneLayer> scene_layers(const SceneConfig& cfg);

StereoSample gen_scene(const SceneConfig& cfg);

struct AugmentFlags {
    bool chromatic = false;
    bool hflip = false;
    bool vflip = false;
};

// Chromatic: shared brightness/gamma plus per-channel gains, both views alike.
// vflip: flip everything vertically. hflip: mirror both views, swap the
// left/right roles, mirror gt.
StereoSample augment(const StereoSample& s, Rng& rng, AugmentFlags flags);

struct Dataset {
    std::vector<StereoSample> train, val, test, ood;
};

// Disjoint per-split seed ranges derived from the master seed; the
// out-of-domain split uses the next texture family.
Dataset make_dataset(int n_train, int n_val, int n_test, const SceneConfig& tmpl,
                     uint64_t master_seed);

uint64_t split_seed(uint64_t master_seed, int split_index, int sample_index);

// Factor-s nearest decimation (top-left anchor), used to compare
// super-resolution gt against a base-resolution render and to train with gt
// resized to the input resolution.
DisparityField nearest_downsample(const DisparityField& gt, int factor);

} // namespace smx
