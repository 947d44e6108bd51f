#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "windsr/synth.hpp"

namespace windsr {

/// Power-law shear profile parameters.
struct PowerLawParams {
    double alpha = 1.0 / 7.0;
};

/// u_ref * (z_target / z_ref)^alpha.
inline double power_law(double u_ref, double z_ref, double z_target,
                        const PowerLawParams& params = {}) {
    if (!(z_ref > 0.0) || !(z_target > 0.0))
        throw std::invalid_argument("power_law: heights must be positive");
    if (u_ref < 0.0) throw std::invalid_argument("power_law: u_ref must be >= 0");
    if (!std::isfinite(params.alpha))
        throw std::invalid_argument("power_law: alpha must be finite");
    return u_ref * std::pow(z_target / z_ref, params.alpha);
}

/// Maps every station's speed to z_target through the power law; stations
/// already at z_target pass through unchanged.
inline std::vector<StationObs> lift_stations(const std::vector<StationObs>& stations,
                                             double z_target,
                                             const PowerLawParams& params = {}) {
    std::vector<StationObs> out;
    out.reserve(stations.size());
    for (const auto& s : stations) {
        StationObs lifted = s;
        if (s.height_m != z_target) {
            lifted.speed_mps = power_law(s.speed_mps, s.height_m, z_target, params);
            lifted.height_m = z_target;
        }
        out.push_back(std::move(lifted));
    }
    return out;
}

}  // namespace windsr
