#pragma once

#include <cstdint>
#include <span>

#include "windsr/field.hpp"
#include "windsr/rng.hpp"
#include "windsr/schedule.hpp"

namespace windsr {

/// Dataset statistics used to (de)normalize wind and terrain channels.
struct NormStats {
    double wind_mean = 0.0;
    double wind_std = 1.0;
    double terrain_mean = 0.0;
    double terrain_std = 1.0;
};

/// Conditioning channels for the denoiser, already normalized and on the
/// high-resolution target grid.
struct Conditioning {
    Field2D lr_upsampled;
    Field2D terrain;
    bool has_terrain = true;
};

/// Noise-prediction interface: anything able to estimate the injected noise
/// from (x_t, conditioning, t). Implemented by the trained denoiser, by test
/// stubs, and by the closed-form optimal denoiser of the Gaussian toy.
struct EpsilonModel {
    virtual ~EpsilonModel() = default;
    virtual Field2D predict(const Field2D& xt, const Conditioning& cond, int t) const = 0;
};

/// Closed-form forward marginal: sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
Field2D forward_sample(const Field2D& x0, int t, const Field2D& eps, const NoiseSchedule& sched);

/// Step-by-step forward noising x_s = sqrt(1-beta_s) x_{s-1} + sqrt(beta_s) eps_s
/// with injected per-step noise (eps_steps[s-1] is used at step s).
Field2D iterated_forward(const Field2D& x0, int t, std::span<const Field2D> eps_steps,
                         const NoiseSchedule& sched);

/// Same, drawing each step's noise from `rng`.
Field2D iterated_forward(const Field2D& x0, int t, RngStream& rng, const NoiseSchedule& sched);

/// Per-sample noise-prediction objective: mean squared error between the
/// injected noise and the model prediction at x_t = forward_sample(x0, t, eps).
double training_loss(const EpsilonModel& model, const Field2D& x0, const Conditioning& cond,
                     int t, const Field2D& eps, const NoiseSchedule& sched);

/// One reverse step: mu + sigma_t * z with the standard noise-prediction
/// parameterization of mu. Callers pass z = 0 at t = 1 (sigma_1 is 0 anyway).
Field2D reverse_step(const EpsilonModel& model, const Field2D& xt, int t,
                     const Conditioning& cond, const Field2D& z, const NoiseSchedule& sched);

/// Full ancestral sampler: starts from standard-normal x_T, walks t = T..1,
/// de-normalizes with `stats` and clamps speeds at 0. Deterministic in seed.
Field2D sample(const EpsilonModel& model, const Conditioning& cond, const NoiseSchedule& sched,
               std::uint64_t seed, const NormStats& stats);

// -- normalization helpers ---------------------------------------------------

Field2D normalized(const Field2D& f, double mean, double sd);

/// Conditioning from raw (m/s, m) channels; the terrain argument is ignored
/// when use_terrain is false.
Conditioning make_conditioning(const Field2D& lr_upsampled_raw, const Field2D& terrain_raw,
                               const NormStats& stats, bool use_terrain);

}  // namespace windsr
