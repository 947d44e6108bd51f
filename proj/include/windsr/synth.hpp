#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "windsr/field.hpp"
#include "windsr/rng.hpp"

namespace windsr {

/// Parameters for the synthetic terrain / truth-wind / biased-simulation
/// generators. Stands in for the real WTK/HRRR/HGT data, which is out of
/// scope here; only the spatial statistics matter for the method.
struct SynthConfig {
    std::uint64_t seed = 0;
    int size = 128;
    double terrain_roughness = 2.0;        // spectral exponent of the elevation field
    double terrain_amplitude_m = 800.0;
    double wind_mean_mps = 8.0;
    double wind_synoptic_amplitude_mps = 4.0;
    double terrain_coupling = 0.4;         // in [0,1]
    double bias_amplitude_mps = 1.5;
    double bias_length_scale_cells = 32.0;
    int blur_radius_cells = 2;
};

void validate_synth_config(const SynthConfig& cfg);

/// Sparse point observation of wind speed at a grid cell.
struct StationObs {
    std::string id;
    int row = 0;
    int col = 0;
    double height_m = 80.0;
    double speed_mps = 0.0;
};

/// Cell size (km) used for all synthetic grids.
inline constexpr double kSynthCellKm = 2.0;

// -- spectral building blocks (public so tests can re-derive them) ----------

/// Integer radial wavenumber magnitude for DFT bin (u, v).
double radial_wavenumber(int u, int v, int rows, int cols);

/// Amplitude filter for a power spectrum proportional to k^(-roughness).
double power_spectrum_filter(double k, double roughness);

/// Gaussian low-pass amplitude filter exp(-(k/k0)^2).
double gaussian_lowpass_filter(double k, double k0);

/// Standard-normal white noise field; consumes rows*cols draws row-major.
Field2D white_noise_field(int rows, int cols, double cell_km, RngStream& rng);

/// White noise shaped in the Fourier domain by `amp_filter(k)` (the DC bin is
/// always zeroed). The white field is the first and only thing drawn from
/// `rng`, row-major, so oracles can regenerate it from the same stream.
Field2D spectral_shaped_field(int rows, int cols, double cell_km,
                              const std::function<double(double)>& amp_filter,
                              RngStream& rng);

/// Shift/scale to zero mean and unit population variance (zeros if flat).
void standardize(Field2D& f);

/// Mean filter over a (2*radius+1)^2 window clipped at the grid edges.
/// radius 0 is the identity.
Field2D box_blur(const Field2D& f, int radius);

/// Magnitude of the spatial gradient, central differences inside and
/// one-sided at the borders, in value units per cell.
Field2D gradient_magnitude(const Field2D& f);

// -- generators --------------------------------------------------------------

/// Elevation field from spectral synthesis, rescaled to [0, terrain_amplitude_m].
/// Deterministic in cfg.seed (substream "terrain").
Field2D gen_terrain(const SynthConfig& cfg);

/// Hub-height truth wind: mean + smooth synoptic component + coupling times
/// the standardized terrain-gradient magnitude, clamped at 0.
/// Deterministic in cfg.seed (substream "synoptic").
Field2D gen_truth_wind(const Field2D& terrain, const SynthConfig& cfg);

/// Biased simulation counterpart: blurred truth plus a smooth additive bias
/// field, clamped at 0. Deterministic in cfg.seed (substream "bias").
Field2D make_biased_sim(const Field2D& truth, const SynthConfig& cfg);

/// k distinct cells drawn uniformly without replacement (substream
/// "stations"); speeds read from `truth`, heights fixed at 80 m.
std::vector<StationObs> sample_stations(const Field2D& truth, int k, std::uint64_t seed);

}  // namespace windsr
