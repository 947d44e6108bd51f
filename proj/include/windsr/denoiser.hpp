#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "windsr/diffusion.hpp"
#include "windsr/field.hpp"
#include "windsr/schedule.hpp"

namespace windsr {

/// One 2-D convolution layer; weights are [out][in][k][k] row-major.
struct ConvLayer {
    int in_ch = 0;
    int out_ch = 0;
    int ksize = 3;
    std::vector<double> w;
    std::vector<double> b;

    [[nodiscard]] std::size_t w_index(int oc, int ic, int ky, int kx) const {
        return ((static_cast<std::size_t>(oc) * in_ch + ic) * ksize + ky) * ksize + kx;
    }
};

enum class PaddingMode { Zero, Wrap };

/// Flat convolutional noise-prediction network with a learned per-timestep
/// bias vector injected after the first layer. Input channels: the noisy
/// field x_t plus the conditioning channels (upsampled LR, optionally
/// terrain); output: one channel of predicted noise.
struct DenoiserModel {
    int T = 200;
    int hidden = 32;
    bool use_terrain = true;
    PaddingMode padding = PaddingMode::Zero;
    std::vector<ConvLayer> layers;
    std::vector<double> time_emb;  // [T][hidden]
    NormStats norm;

    [[nodiscard]] int input_channels() const { return use_terrain ? 3 : 2; }
    [[nodiscard]] std::size_t parameter_count() const;
};

DenoiserModel init_denoiser(int T, int n_layers, int hidden, bool use_terrain,
                            std::uint64_t seed);

/// Stacks [x_t, conditioning] and runs the convolution stack.
Field2D denoiser_forward(const DenoiserModel& model, const Field2D& xt,
                         const Conditioning& cond, int t);

/// EpsilonModel adapter over a trained (or stub) DenoiserModel.
struct DenoiserEpsilon final : EpsilonModel {
    explicit DenoiserEpsilon(const DenoiserModel& m) : model(&m) {}
    Field2D predict(const Field2D& xt, const Conditioning& cond, int t) const override {
        return denoiser_forward(*model, xt, cond, t);
    }
    const DenoiserModel* model;
};

/// Parameter-shaped gradient accumulator.
struct DenoiserGradients {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;
    std::vector<double> time_emb;
};

/// One training example, in normalized units.
struct TrainSample {
    Field2D x0;
    Conditioning cond;
    int t = 1;
    Field2D eps;
};

/// Reverse-mode gradients of the batch-averaged noise-prediction loss with
/// respect to every parameter, plus the loss itself.
std::pair<DenoiserGradients, double> denoiser_backward(const DenoiserModel& model,
                                                       std::span<const TrainSample> batch,
                                                       const NoiseSchedule& sched);

struct TrainConfig {
    int iterations = 2000;
    int batch_size = 8;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    int T = 200;
    double beta_start = 1e-4;
    double beta_end = 0.06;
    int n_layers = 4;
    int hidden = 32;
    bool use_terrain = true;
    int factor = 4;      // SR factor used to build conditioning from lr
    int patch_size = 32; // patch edge used by the CLI training pipeline
};

void validate_train_config(const TrainConfig& cfg);

struct TrainResult {
    DenoiserModel model;
    std::vector<double> loss_history;
};

/// Stochastic training loop: sample batch, sample t and eps, step an
/// adaptive-moment optimizer. Deterministic in cfg.seed (single-threaded).
TrainResult train_denoiser(const std::vector<PatchPair>& dataset, const TrainConfig& cfg);

}  // namespace windsr
