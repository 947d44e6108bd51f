#pragma once

#include <vector>

#include "windsr/field.hpp"

namespace windsr {

/// Variance schedule driving the forward and reverse diffusion processes.
/// Arrays are 0-indexed: entry i corresponds to step t = i+1.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> beta;           // beta_t
    std::vector<double> alpha;          // 1 - beta_t
    std::vector<double> alpha_bar;      // prod_{s<=t} alpha_s
    std::vector<double> posterior_var;  // sigma_t^2; 0 at the first step
};

/// Linear beta schedule from beta_start to beta_end inclusive.
NoiseSchedule make_linear_schedule(int T, double beta_start, double beta_end);

}  // namespace windsr
