#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "stereomix/mixture.hpp"
#include "stereomix/tensor.hpp"

namespace smx {

// Backbone output feature map; queried bilinearly at continuous coordinates.
// Invariants: width >= 2, height >= 2, channels >= 1, values finite.
using FeatureGrid = Tensor;

// Continuous coordinate in Omega = [0, W-1] x [0, H-1] of a grid.
struct QueryPoint {
    double x, y;
};

// The four surrounding cells and their bilinear weights (sum to 1).
struct CornerWeights {
    int x0, y0, x1, y1;
    double w00, w10, w01, w11; // (x0,y0) (x1,y0) (x0,y1) (x1,y1)
};

// Throws DomainError for q outside Omega.
CornerWeights corner_weights(int width, int height, QueryPoint q);

void interp(const FeatureGrid& grid, QueryPoint q, std::span<double> out);
std::vector<double> interp(const FeatureGrid& grid, QueryPoint q);

// Distributes `upstream` onto the four corner cells of `grad` (accumulates).
void interp_backward(const FeatureGrid& grid, QueryPoint q,
                     std::span<const double> upstream, Tensor& grad);

enum class Activation : uint8_t { Sine, Sigmoid, Identity };

struct MlpLayer {
    int in_dim = 0, out_dim = 0;
    Activation act = Activation::Sine;
    std::vector<double> w;  // out_dim x in_dim, row-major
    std::vector<double> b;  // out_dim
    std::vector<double> gw; // gradient accumulators, same shapes
    std::vector<double> gb;
};

// MLP head mapping a D-dim feature to raw (0,1)^out outputs. Reference widths
// (D, 1024, 512, 256, 128, out) scaled by width_factor; sine hidden layers,
// sigmoid output.
struct MlpHead {
    std::vector<MlpLayer> layers;
    int input_dim() const { return layers.front().in_dim; }
    int output_dim() const { return layers.back().out_dim; }
    void zero_grad();
};

MlpHead make_head(int feature_dim, int out_dim, double width_factor);

// First layer U[-1/D, 1/D]; deeper layers U[-sqrt(6/fan_in)/30, +...]; zero
// biases. Deterministic given seed.
void sine_init(MlpHead& head, uint64_t seed);

// Batched forward: feats is n x D row-major, raw is n x out. When cache is
// non-null it stores what backward needs.
struct HeadCache {
    int n = 0;
    std::vector<std::vector<double>> act; // act[0] = input, act[l] = layer l output
    std::vector<std::vector<double>> pre; // pre-activations per layer
};
void head_forward(const MlpHead& head, const double* feats, int n, double* raw,
                  HeadCache* cache);
std::array<double, 5> head_forward_one(const MlpHead& head, std::span<const double> feat);

// upstream is n x out d(loss)/d(raw); accumulates into gw/gb; feat_grad
// (n x D) may be null.
void head_backward(MlpHead& head, const HeadCache& cache, const double* upstream,
                   double* feat_grad);

// Raw sigmoid outputs -> decoded parameters.
MixtureParams decode_params(const std::array<double, 5>& raw);
UnimodalParams decode_unimodal(const std::array<double, 2>& raw);

// Chain rule through decode_params; clamped components pass zero gradient.
std::array<double, 5> decode_backward(const std::array<double, 5>& raw, const Grad5& g);
std::array<double, 2> decode_unimodal_backward(const std::array<double, 2>& raw,
                                               const Grad2& g);

} // namespace smx
