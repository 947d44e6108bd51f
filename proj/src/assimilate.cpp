#include "windsr/assimilate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "windsr/resample.hpp"

namespace windsr {

void validate_radius_config(const RadiusConfig& cfg) {
    if (cfg.min_radius < 1 || cfg.min_radius > cfg.max_radius)
        throw std::invalid_argument("RadiusConfig: need 1 <= min_radius <= max_radius");
    if (!(cfg.t1_terrain_m > 0.0) || !(cfg.t2_wind_mps > 0.0))
        throw std::invalid_argument("RadiusConfig: thresholds must be positive");
    if (!(cfg.kernel_sigma_fraction > 0.0))
        throw std::invalid_argument("RadiusConfig: kernel_sigma_fraction must be positive");
}

namespace {

void check_station_bounds(const StationObs& s, int rows, int cols) {
    if (s.row < 0 || s.row >= rows || s.col < 0 || s.col >= cols)
        throw std::invalid_argument("station '" + s.id + "' out of grid bounds");
}

void check_stations(const std::vector<StationObs>& stations, int rows, int cols) {
    std::set<std::pair<int, int>> seen;
    for (const auto& s : stations) {
        check_station_bounds(s, rows, cols);
        if (!seen.insert({s.row, s.col}).second)
            throw std::invalid_argument("duplicate station cell (" + std::to_string(s.row) +
                                        "," + std::to_string(s.col) + ")");
    }
}

}  // namespace

Field2D interpolate_observations(const std::vector<StationObs>& stations, int rows, int cols,
                                 double cell_km) {
    if (stations.empty())
        throw std::invalid_argument("interpolate_observations: empty station list");
    check_stations(stations, rows, cols);

    Field2D out(rows, cols, cell_km);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            double wsum = 0.0, vsum = 0.0;
            bool exact = false;
            for (const auto& s : stations) {
                const double dr = r - s.row;
                const double dc = c - s.col;
                const double d2 = dr * dr + dc * dc;
                if (d2 == 0.0) {
                    out.at(r, c) = s.speed_mps;
                    exact = true;
                    break;
                }
                const double w = 1.0 / d2;
                wsum += w;
                vsum += w * s.speed_mps;
            }
            if (!exact) out.at(r, c) = vsum / wsum;
        }
    }
    return out;
}

int dynamic_impact_radius(int row, int col, const Field2D& terrain, const Field2D& sim_wind,
                          const RadiusConfig& cfg) {
    validate_radius_config(cfg);
    require_same_shape(terrain, sim_wind, "dynamic_impact_radius");
    if (!terrain.in_bounds(row, col))
        throw std::invalid_argument("dynamic_impact_radius: station out of bounds");

    int r = cfg.min_radius;
    while (r < cfg.max_radius) {
        // Disc membership uses the literal condition dr^2 + dc^2 <= r^2,
        // clipped at the grid edges; standard deviations are population.
        double hsum = 0.0, hsq = 0.0, ssum = 0.0, ssq = 0.0;
        long n = 0;
        const long r2 = static_cast<long>(r) * r;
        for (int dr = -r; dr <= r; ++dr) {
            const int rr = row + dr;
            if (rr < 0 || rr >= terrain.rows) continue;
            for (int dc = -r; dc <= r; ++dc) {
                const int cc = col + dc;
                if (cc < 0 || cc >= terrain.cols) continue;
                if (static_cast<long>(dr) * dr + static_cast<long>(dc) * dc > r2) continue;
                const double h = terrain.at(rr, cc);
                const double s = sim_wind.at(rr, cc);
                hsum += h;
                hsq += h * h;
                ssum += s;
                ssq += s * s;
                ++n;
            }
        }
        const double inv = 1.0 / static_cast<double>(n);
        const double sigma_h = std::sqrt(std::max(0.0, hsq * inv - hsum * inv * hsum * inv));
        const double sigma_s = std::sqrt(std::max(0.0, ssq * inv - ssum * inv * ssum * inv));
        if (sigma_h < cfg.t1_terrain_m && sigma_s < cfg.t2_wind_mps)
            ++r;
        else
            break;
    }
    return r;
}

SoftMask build_soft_mask(const std::vector<StationObs>& stations, const std::vector<int>& radii,
                         int rows, int cols, double cell_km, const RadiusConfig& cfg) {
    validate_radius_config(cfg);
    if (stations.size() != radii.size())
        throw std::invalid_argument("build_soft_mask: one radius per station required");
    for (int r : radii)
        if (r < cfg.min_radius || r > cfg.max_radius)
            throw std::invalid_argument("build_soft_mask: radius outside [min,max]");
    check_stations(stations, rows, cols);

    SoftMask mask{Field2D(rows, cols, cell_km, 0.0)};
    for (std::size_t i = 0; i < stations.size(); ++i) {
        const StationObs& s = stations[i];
        const int r = radii[i];
        const double sigma = cfg.kernel_sigma_fraction * r;
        const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
        const long r2 = static_cast<long>(r) * r;
        for (int dr = -r; dr <= r; ++dr) {
            const int rr = s.row + dr;
            if (rr < 0 || rr >= rows) continue;
            for (int dc = -r; dc <= r; ++dc) {
                const int cc = s.col + dc;
                if (cc < 0 || cc >= cols) continue;
                const long d2 = static_cast<long>(dr) * dr + static_cast<long>(dc) * dc;
                if (d2 > r2) continue;
                const double w =
                    d2 == 0 ? 1.0 : std::exp(-static_cast<double>(d2) * inv_two_sigma2);
                double& cell = mask.weights.at(rr, cc);
                cell = std::min(1.0, std::max(cell, w));
            }
        }
    }
    return mask;
}

Field2D blend(const Field2D& obs_field, const Field2D& sim_field, const SoftMask& mask) {
    require_same_shape(obs_field, sim_field, "blend");
    require_same_shape(obs_field, mask.weights, "blend");
    Field2D out(sim_field.rows, sim_field.cols, sim_field.cell_size_km);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double m = mask.weights.values[i];
        out.values[i] = m * obs_field.values[i] + (1.0 - m) * sim_field.values[i];
    }
    return out;
}

Field2D assimilation_composite(const Field2D& sim_hr, const Field2D& terrain,
                               const std::vector<StationObs>& stations, const RadiusConfig& cfg,
                               std::vector<int>* radii_out) {
    require_same_shape(sim_hr, terrain, "assimilation_composite");
    if (stations.empty()) {
        if (radii_out) radii_out->clear();
        return sim_hr;
    }
    const Field2D obs =
        interpolate_observations(stations, sim_hr.rows, sim_hr.cols, sim_hr.cell_size_km);
    std::vector<int> radii;
    radii.reserve(stations.size());
    for (const auto& s : stations)
        radii.push_back(dynamic_impact_radius(s.row, s.col, terrain, sim_hr, cfg));
    const SoftMask mask =
        build_soft_mask(stations, radii, sim_hr.rows, sim_hr.cols, sim_hr.cell_size_km, cfg);
    if (radii_out) *radii_out = std::move(radii);
    return blend(obs, sim_hr, mask);
}

namespace {

int infer_factor(const Field2D& lr, const Field2D& hr_terrain) {
    if (lr.rows < 1 || lr.cols < 1)
        throw std::invalid_argument("downscale: empty low-resolution field");
    if (hr_terrain.rows % lr.rows != 0 || hr_terrain.cols % lr.cols != 0)
        throw std::invalid_argument("downscale: terrain dims must be a multiple of lr dims");
    const int fr = hr_terrain.rows / lr.rows;
    const int fc = hr_terrain.cols / lr.cols;
    if (fr != fc || fr < 2)
        throw std::invalid_argument("downscale: lr/terrain dims imply no integer factor >= 2");
    return fr;
}

}  // namespace

Field2D assimilated_downscale(const DenoiserModel& model, const NoiseSchedule& sched,
                              const Field2D& lr_sim, const Field2D& terrain,
                              const std::vector<StationObs>& stations, const RadiusConfig& cfg,
                              std::uint64_t seed) {
    const int factor = infer_factor(lr_sim, terrain);
    const Field2D up = upsample_bilinear(lr_sim, factor);
    const Field2D composite = assimilation_composite(up, terrain, stations, cfg);
    const Conditioning cond = make_conditioning(composite, terrain, model.norm, model.use_terrain);
    return sample(DenoiserEpsilon(model), cond, sched, seed, model.norm);
}

Field2D downscale(const DenoiserModel& model, const NoiseSchedule& sched, const Field2D& lr_sim,
                  const Field2D& terrain, std::uint64_t seed) {
    const int factor = infer_factor(lr_sim, terrain);
    const Field2D up = upsample_bilinear(lr_sim, factor);
    const Conditioning cond = make_conditioning(up, terrain, model.norm, model.use_terrain);
    return sample(DenoiserEpsilon(model), cond, sched, seed, model.norm);
}

}  // namespace windsr
