#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "windsr/assimilate.hpp"
#include "windsr/denoiser.hpp"
#include "windsr/synth.hpp"

#include <json.hpp>

namespace windsr {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScheduleConfig {
    int T = 200;
    double beta_start = 1e-4;
    double beta_end = 0.06;
};

struct EvalConfig {
    std::vector<double> probs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    // "auto" derives the range from the truth field; otherwise a fixed value.
    std::string data_range_policy = "auto";
    double data_range_value = 0.0;
};

/// Full experiment configuration. Parsing rejects unknown keys; every field
/// has a default and is echoed back into the run metadata.
struct RunConfig {
    SynthConfig synth;
    int n_fields = 1;
    int n_stations = 10;
    ScheduleConfig schedule;
    TrainConfig train;
    RadiusConfig assimilation;
    double shear_alpha = 1.0 / 7.0;
    double target_height_m = 80.0;
    EvalConfig eval;
    std::uint64_t sample_seed = 0;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Complete echo with every default filled in; parse(echo(c)) == c.
nlohmann::json echo_run_config(const RunConfig& cfg);

void validate_run_config(const RunConfig& cfg);

}  // namespace windsr
