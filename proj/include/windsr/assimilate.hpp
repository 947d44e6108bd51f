#pragma once

#include <cstdint>
#include <vector>

#include "windsr/denoiser.hpp"
#include "windsr/field.hpp"
#include "windsr/schedule.hpp"
#include "windsr/synth.hpp"

namespace windsr {

/// Dynamic impact radius bounds and thresholds. The radius of a station
/// grows from min_radius while the terrain / wind-speed standard deviations
/// inside its disc stay below T1 / T2.
struct RadiusConfig {
    int min_radius = 1;
    int max_radius = 6;
    double t1_terrain_m = 50.0;
    double t2_wind_mps = 1.0;
    double kernel_sigma_fraction = 0.5;  // Gaussian sigma as a fraction of the radius
};

void validate_radius_config(const RadiusConfig& cfg);

/// Per-pixel blend weights in [0,1]; 1 at station pixels, 0 outside discs.
struct SoftMask {
    Field2D weights;
};

/// Inverse-distance-weighted (power 2) interpolation of the station values
/// onto the grid; exact at station cells.
Field2D interpolate_observations(const std::vector<StationObs>& stations, int rows, int cols,
                                 double cell_km);

/// Impact radius for the station at (row, col), grown per the variance
/// thresholds and clipped to [min_radius, max_radius].
int dynamic_impact_radius(int row, int col, const Field2D& terrain, const Field2D& sim_wind,
                          const RadiusConfig& cfg);

/// Truncated Gaussian soft-bleed weights around every station; overlapping
/// stations combine by per-pixel maximum.
SoftMask build_soft_mask(const std::vector<StationObs>& stations, const std::vector<int>& radii,
                         int rows, int cols, double cell_km, const RadiusConfig& cfg);

/// Elementwise convex combination: mask*obs + (1-mask)*sim.
Field2D blend(const Field2D& obs_field, const Field2D& sim_field, const SoftMask& mask);

/// Composite conditioning field: observations interpolated, dynamic radii
/// computed against terrain and the (upsampled) simulation, soft mask built,
/// then blended into the simulation. Returns the simulation unchanged for an
/// empty station list. radii_out, when given, receives the per-station radii.
Field2D assimilation_composite(const Field2D& sim_hr, const Field2D& terrain,
                               const std::vector<StationObs>& stations, const RadiusConfig& cfg,
                               std::vector<int>* radii_out = nullptr);

/// Full assimilated conditional downscaling: upsample the LR simulation,
/// blend observations into it, then run diffusion sampling conditioned on
/// [composite, terrain]. With no stations this is plain downscaling.
Field2D assimilated_downscale(const DenoiserModel& model, const NoiseSchedule& sched,
                              const Field2D& lr_sim, const Field2D& terrain,
                              const std::vector<StationObs>& stations, const RadiusConfig& cfg,
                              std::uint64_t seed);

/// Plain conditional downscaling without observations.
Field2D downscale(const DenoiserModel& model, const NoiseSchedule& sched, const Field2D& lr_sim,
                  const Field2D& terrain, std::uint64_t seed);

}  // namespace windsr
