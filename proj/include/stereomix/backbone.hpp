#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stereomix/data.hpp"
#include "stereomix/field.hpp"
#include "stereomix/sampling.hpp"
#include "stereomix/tensor.hpp"

namespace smx {

// Left ++ right RGB, channels == 6, values in [0,1].
using StereoInput = Tensor;

// 3x3 conv, padding 1, stride 1 or 2.
struct ConvLayer {
    int in_ch = 0, out_ch = 0, stride = 1;
    std::vector<double> w;  // [out_ch][in_ch][3][3]
    std::vector<double> b;  // [out_ch]
    std::vector<double> gw; // gradient accumulators
    std::vector<double> gb;
};

// Encoder-decoder over the concatenated stereo pair: a stride-1 stem plus
// n_down stride-2 convs, then nearest-upsample + skip-concat convs back to
// full resolution and a linear output conv producing D channels. Leaky-ReLU
// (slope 0.1) everywhere else. Input sides must be divisible by 2^n_down.
struct ConvNet {
    int n_down = 3, base_ch = 16, out_ch = 32;
    std::vector<ConvLayer> enc; // n_down + 1 layers
    std::vector<ConvLayer> dec; // n_down + 1 layers, last one linear

    void zero_grad();
};

ConvNet make_convnet(int n_down, int base_ch, int out_ch);
void convnet_init(ConvNet& net, uint64_t seed);

// Everything backward needs: per conv its input and pre-activation tensors.
struct NetCache {
    std::vector<Tensor> conv_in;
    std::vector<Tensor> conv_pre;
    size_t value_count() const; // activation accounting for the memory contract
};

FeatureGrid net_forward(const ConvNet& net, const StereoInput& input, NetCache* cache);

// Accumulates parameter gradients from d(loss)/d(feature grid).
void net_backward(ConvNet& net, const NetCache& cache, const Tensor& grid_grad);

// ---------------------------------------------------------------------------

struct ParamRef {
    std::vector<double>* w;
    std::vector<double>* g;
};

struct AdamState {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int64_t step = 0;
    std::vector<std::vector<double>> m, v;
};

std::vector<ParamRef> collect_params(ConvNet& net, MlpHead& head);
std::vector<const std::vector<double>*> collect_weights(const ConvNet& net,
                                                        const MlpHead& head);
void adam_init(AdamState& st, const std::vector<ParamRef>& params);
// Standard bias-corrected update; throws ShapeError on buffer disagreement.
void adam_step(AdamState& st, const std::vector<ParamRef>& params, double lr);

// ---------------------------------------------------------------------------

enum class HeadKind : uint8_t { Bimodal = 0, Unimodal = 1, PointL1 = 2 };
int head_out_dim(HeadKind kind);
const char* head_kind_name(HeadKind kind);

struct Model {
    ConvNet net;
    MlpHead head;
    HeadKind kind = HeadKind::Bimodal;
    double d_max = 0.0;
    double width_factor = 0.125;
};

Model make_model(HeadKind kind, int n_down, int base_ch, int feature_dim,
                 double width_factor, double d_max, uint64_t seed);

enum class SamplingKind : uint8_t { Random = 0, Dda = 1 };

struct TrainConfig {
    int points_per_crop = 2048; // N, even
    int crop = 64;
    int epochs = 8;
    double lr = 1e-3;
    HeadKind loss = HeadKind::Bimodal;
    SamplingKind sampling = SamplingKind::Random;
    int rho = 10;
    int sr_factor = 4;        // gt resolution factor of the dataset
    bool gt_at_base = false;  // train on gt decimated to input resolution
    bool augment = true;      // chromatic + flips
    int query_batch = 16384;  // inference batching
    uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

struct TrainResult {
    std::vector<double> epoch_loss; // mean point loss per epoch
};

// One optimization step per (sample, epoch) pair: random crop, backbone
// forward, N sampled points through interp -> head -> decode -> loss,
// averaged, backprop, Adam. All randomness is a pure function of (cfg.seed,
// epoch, step), so runs resume bitwise-identically from any epoch boundary.
TrainResult train(Model& model, AdamState& adam, const std::vector<StereoSample>& dataset,
                  const TrainConfig& cfg, int start_epoch = 0,
                  const std::function<void(int, double)>& on_epoch = {});

struct InferResult {
    DisparityField disparity;        // normalized [0,1], out_w x out_h
    std::vector<double> uncertainty; // entropy (nats); empty unless requested
    std::vector<double> pi, mu1, mu2; // bimodal only
    size_t backbone_cache_values = 0;
    size_t peak_query_batch = 0;
};

// Runs the backbone once at input resolution and queries the head at every
// output-grid center in batches of at most query_batch points, so activation
// memory is independent of the output size.
InferResult infer_grid(const Model& model, const StereoInput& input, int out_w,
                       int out_h, int query_batch, bool with_uncertainty);

StereoInput concat_stereo(const Tensor& left, const Tensor& right);

} // namespace smx
