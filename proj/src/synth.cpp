#include "windsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace windsr {

void validate_synth_config(const SynthConfig& cfg) {
    if (cfg.size < 32) throw std::invalid_argument("SynthConfig: size must be >= 32");
    if (cfg.terrain_amplitude_m < 0 || cfg.wind_synoptic_amplitude_mps < 0 ||
        cfg.bias_amplitude_mps < 0)
        throw std::invalid_argument("SynthConfig: amplitudes must be >= 0");
    if (cfg.terrain_coupling < 0 || cfg.terrain_coupling > 1)
        throw std::invalid_argument("SynthConfig: terrain_coupling must be in [0,1]");
    if (cfg.wind_mean_mps < 0)
        throw std::invalid_argument("SynthConfig: wind_mean_mps must be >= 0");
    if (cfg.bias_length_scale_cells <= 0)
        throw std::invalid_argument("SynthConfig: bias_length_scale_cells must be positive");
    if (cfg.blur_radius_cells < 0)
        throw std::invalid_argument("SynthConfig: blur_radius_cells must be >= 0");
    if (cfg.terrain_roughness < 0)
        throw std::invalid_argument("SynthConfig: terrain_roughness must be >= 0");
}

double radial_wavenumber(int u, int v, int rows, int cols) {
    const int ku = std::min(u, rows - u);
    const int kv = std::min(v, cols - v);
    return std::hypot(static_cast<double>(ku), static_cast<double>(kv));
}

double power_spectrum_filter(double k, double roughness) {
    return k > 0.0 ? std::pow(k, -0.5 * roughness) : 0.0;
}

double gaussian_lowpass_filter(double k, double k0) {
    const double x = k / k0;
    return std::exp(-x * x);
}

Field2D white_noise_field(int rows, int cols, double cell_km, RngStream& rng) {
    return normal_field(rows, cols, cell_km, rng);
}

namespace {

using cplx = std::complex<double>;

// Naive O(N^2) 1-D DFT; sign = -1 forward, +1 inverse (unscaled).
void dft_1d(const std::vector<cplx>& in, std::vector<cplx>& out, int sign) {
    const int n = static_cast<int>(in.size());
    out.assign(n, cplx{0.0, 0.0});
    const double w = sign * 2.0 * M_PI / n;
    for (int k = 0; k < n; ++k) {
        cplx acc{0.0, 0.0};
        for (int j = 0; j < n; ++j) {
            const double a = w * k * j;
            acc += in[j] * cplx{std::cos(a), std::sin(a)};
        }
        out[k] = acc;
    }
}

// Row-column 2-D DFT over a rows x cols complex array (row-major).
void dft_2d(std::vector<cplx>& data, int rows, int cols, int sign) {
    std::vector<cplx> line, tline;
    line.reserve(std::max(rows, cols));
    for (int r = 0; r < rows; ++r) {
        line.assign(data.begin() + static_cast<std::ptrdiff_t>(r) * cols,
                    data.begin() + static_cast<std::ptrdiff_t>(r + 1) * cols);
        dft_1d(line, tline, sign);
        std::copy(tline.begin(), tline.end(), data.begin() + static_cast<std::ptrdiff_t>(r) * cols);
    }
    for (int c = 0; c < cols; ++c) {
        line.resize(rows);
        for (int r = 0; r < rows; ++r) line[r] = data[static_cast<std::size_t>(r) * cols + c];
        dft_1d(line, tline, sign);
        for (int r = 0; r < rows; ++r) data[static_cast<std::size_t>(r) * cols + c] = tline[r];
    }
}

Field2D clamp_nonnegative(Field2D f) {
    for (double& v : f.values) v = std::max(0.0, v);
    return f;
}

}  // namespace

Field2D spectral_shaped_field(int rows, int cols, double cell_km,
                              const std::function<double(double)>& amp_filter,
                              RngStream& rng) {
    Field2D white = white_noise_field(rows, cols, cell_km, rng);

    std::vector<cplx> spec(white.values.size());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = cplx{white.values[i], 0.0};
    dft_2d(spec, rows, cols, -1);

    for (int u = 0; u < rows; ++u) {
        for (int v = 0; v < cols; ++v) {
            const double k = radial_wavenumber(u, v, rows, cols);
            const double a = k > 0.0 ? amp_filter(k) : 0.0;
            spec[static_cast<std::size_t>(u) * cols + v] *= a;
        }
    }

    dft_2d(spec, rows, cols, +1);
    const double scale = 1.0 / (static_cast<double>(rows) * cols);
    Field2D out(rows, cols, cell_km);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = spec[i].real() * scale;
    return out;
}

void standardize(Field2D& f) {
    const double mean = f.mean();
    double var = 0.0;
    for (double v : f.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(f.values.size());
    if (var <= 0.0) {
        std::fill(f.values.begin(), f.values.end(), 0.0);
        return;
    }
    const double inv_sd = 1.0 / std::sqrt(var);
    for (double& v : f.values) v = (v - mean) * inv_sd;
}

Field2D box_blur(const Field2D& f, int radius) {
    if (radius < 0) throw std::invalid_argument("box_blur: radius must be >= 0");
    if (radius == 0) return f;
    Field2D out(f.rows, f.cols, f.cell_size_km);
    for (int r = 0; r < f.rows; ++r) {
        const int r0 = std::max(0, r - radius);
        const int r1 = std::min(f.rows - 1, r + radius);
        for (int c = 0; c < f.cols; ++c) {
            const int c0 = std::max(0, c - radius);
            const int c1 = std::min(f.cols - 1, c + radius);
            double s = 0.0;
            for (int rr = r0; rr <= r1; ++rr)
                for (int cc = c0; cc <= c1; ++cc) s += f.at(rr, cc);
            out.at(r, c) = s / ((r1 - r0 + 1) * (c1 - c0 + 1));
        }
    }
    return out;
}

Field2D gradient_magnitude(const Field2D& f) {
    Field2D out(f.rows, f.cols, f.cell_size_km);
    for (int r = 0; r < f.rows; ++r) {
        for (int c = 0; c < f.cols; ++c) {
            double dr, dc;
            if (r == 0)
                dr = f.at(1, c) - f.at(0, c);
            else if (r == f.rows - 1)
                dr = f.at(r, c) - f.at(r - 1, c);
            else
                dr = 0.5 * (f.at(r + 1, c) - f.at(r - 1, c));
            if (c == 0)
                dc = f.at(r, 1) - f.at(r, 0);
            else if (c == f.cols - 1)
                dc = f.at(r, c) - f.at(r, c - 1);
            else
                dc = 0.5 * (f.at(r, c + 1) - f.at(r, c - 1));
            out.at(r, c) = std::hypot(dr, dc);
        }
    }
    return out;
}

Field2D gen_terrain(const SynthConfig& cfg) {
    validate_synth_config(cfg);
    RngStream rng = RngStream(cfg.seed).derive("terrain");
    const double roughness = cfg.terrain_roughness;
    Field2D raw = spectral_shaped_field(
        cfg.size, cfg.size, kSynthCellKm,
        [roughness](double k) { return power_spectrum_filter(k, roughness); }, rng);
    standardize(raw);

    const double mn = raw.min();
    const double mx = raw.max();
    if (cfg.terrain_amplitude_m <= 0.0 || mx <= mn) {
        std::fill(raw.values.begin(), raw.values.end(), 0.0);
        return raw;
    }
    const double scale = cfg.terrain_amplitude_m / (mx - mn);
    for (double& v : raw.values) v = (v - mn) * scale;
    return raw;
}

Field2D gen_truth_wind(const Field2D& terrain, const SynthConfig& cfg) {
    validate_synth_config(cfg);
    if (terrain.rows != cfg.size || terrain.cols != cfg.size)
        throw std::invalid_argument("gen_truth_wind: terrain shape must be size x size");

    RngStream rng = RngStream(cfg.seed).derive("synoptic");
    const double k0 = cfg.size / 16.0;
    Field2D syn = spectral_shaped_field(
        cfg.size, cfg.size, kSynthCellKm,
        [k0](double k) { return gaussian_lowpass_filter(k, k0); }, rng);
    standardize(syn);

    Field2D grad = gradient_magnitude(terrain);
    standardize(grad);

    Field2D wind(cfg.size, cfg.size, kSynthCellKm);
    for (std::size_t i = 0; i < wind.values.size(); ++i)
        wind.values[i] = cfg.wind_mean_mps + cfg.wind_synoptic_amplitude_mps * syn.values[i] +
                         cfg.terrain_coupling * grad.values[i];
    return clamp_nonnegative(std::move(wind));
}

Field2D make_biased_sim(const Field2D& truth, const SynthConfig& cfg) {
    validate_synth_config(cfg);
    RngStream rng = RngStream(cfg.seed).derive("bias");
    const double k0 = std::max(0.5, truth.rows / cfg.bias_length_scale_cells);
    Field2D bias = spectral_shaped_field(
        truth.rows, truth.cols, truth.cell_size_km,
        [k0](double k) { return gaussian_lowpass_filter(k, k0); }, rng);
    standardize(bias);

    Field2D sim = box_blur(truth, cfg.blur_radius_cells);
    for (std::size_t i = 0; i < sim.values.size(); ++i)
        sim.values[i] += cfg.bias_amplitude_mps * bias.values[i];
    return clamp_nonnegative(std::move(sim));
}

std::vector<StationObs> sample_stations(const Field2D& truth, int k, std::uint64_t seed) {
    const auto n = static_cast<std::int64_t>(truth.size());
    if (k < 1 || k > n)
        throw std::invalid_argument("sample_stations: k out of range");

    RngStream rng = RngStream(seed).derive("stations");
    std::vector<std::int64_t> cells(static_cast<std::size_t>(n));
    std::iota(cells.begin(), cells.end(), 0);
    // Partial Fisher-Yates: the first k entries are a uniform sample without
    // replacement.
    for (int i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
        std::swap(cells[static_cast<std::size_t>(i)], cells[static_cast<std::size_t>(j)]);
    }

    std::vector<StationObs> out;
    out.reserve(static_cast<std::size_t>(k));
    char buf[16];
    for (int i = 0; i < k; ++i) {
        const auto cell = cells[static_cast<std::size_t>(i)];
        const int row = static_cast<int>(cell / truth.cols);
        const int col = static_cast<int>(cell % truth.cols);
        std::snprintf(buf, sizeof(buf), "S%03d", i);
        out.push_back(StationObs{buf, row, col, 80.0, truth.at(row, col)});
    }
    return out;
}

}  // namespace windsr
