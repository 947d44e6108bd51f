#include "windsr/run_config.hpp"

#include <fstream>
#include <set>

namespace windsr {

namespace {

using nlohmann::json;

class Section {
public:
    Section(const json& j, std::string name) : name_(std::move(name)) {
        if (!j.is_object()) throw ConfigError("config: section '" + name_ + "' must be an object");
        obj_ = &j;
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = obj_->find(key);
        if (it == obj_->end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config: bad value for '" + name_ + "." + key + "'");
        }
    }

    void finish() const {
        for (auto it = obj_->begin(); it != obj_->end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError("config: unknown key '" + name_ + "." + it.key() + "'");
    }

private:
    const json* obj_;
    std::string name_;
    std::set<std::string> seen_;
};

const std::set<std::string> kTopKeys = {"synth", "schedule", "train",
                                        "assimilation", "eval", "seeds"};

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kTopKeys.count(it.key()))
            throw ConfigError("config: unknown section '" + it.key() + "'");

    RunConfig cfg;

    if (j.contains("synth")) {
        Section s(j["synth"], "synth");
        s.get("seed", cfg.synth.seed);
        s.get("size", cfg.synth.size);
        s.get("terrain_roughness", cfg.synth.terrain_roughness);
        s.get("terrain_amplitude_m", cfg.synth.terrain_amplitude_m);
        s.get("wind_mean_mps", cfg.synth.wind_mean_mps);
        s.get("wind_synoptic_amplitude_mps", cfg.synth.wind_synoptic_amplitude_mps);
        s.get("terrain_coupling", cfg.synth.terrain_coupling);
        s.get("bias_amplitude_mps", cfg.synth.bias_amplitude_mps);
        s.get("bias_length_scale_cells", cfg.synth.bias_length_scale_cells);
        s.get("blur_radius_cells", cfg.synth.blur_radius_cells);
        s.get("n_fields", cfg.n_fields);
        s.get("n_stations", cfg.n_stations);
        s.finish();
    }
    if (j.contains("schedule")) {
        Section s(j["schedule"], "schedule");
        s.get("T", cfg.schedule.T);
        s.get("beta_start", cfg.schedule.beta_start);
        s.get("beta_end", cfg.schedule.beta_end);
        s.finish();
    }
    if (j.contains("train")) {
        Section s(j["train"], "train");
        s.get("iterations", cfg.train.iterations);
        s.get("batch_size", cfg.train.batch_size);
        s.get("learning_rate", cfg.train.learning_rate);
        s.get("beta1", cfg.train.beta1);
        s.get("beta2", cfg.train.beta2);
        s.get("epsilon", cfg.train.epsilon);
        s.get("seed", cfg.train.seed);
        s.get("n_layers", cfg.train.n_layers);
        s.get("hidden", cfg.train.hidden);
        s.get("use_terrain", cfg.train.use_terrain);
        s.get("factor", cfg.train.factor);
        s.get("patch_size", cfg.train.patch_size);
        s.finish();
    }
    if (j.contains("assimilation")) {
        Section s(j["assimilation"], "assimilation");
        s.get("min_radius", cfg.assimilation.min_radius);
        s.get("max_radius", cfg.assimilation.max_radius);
        s.get("t1_terrain_m", cfg.assimilation.t1_terrain_m);
        s.get("t2_wind_mps", cfg.assimilation.t2_wind_mps);
        s.get("kernel_sigma_fraction", cfg.assimilation.kernel_sigma_fraction);
        s.get("shear_alpha", cfg.shear_alpha);
        s.get("target_height_m", cfg.target_height_m);
        s.finish();
    }
    if (j.contains("eval")) {
        Section s(j["eval"], "eval");
        s.get("probs", cfg.eval.probs);
        json dr;
        s.get("data_range", dr);
        if (!dr.is_null()) {
            if (dr.is_string()) {
                cfg.eval.data_range_policy = dr.get<std::string>();
                if (cfg.eval.data_range_policy != "auto")
                    throw ConfigError("config: eval.data_range must be \"auto\" or a number");
            } else if (dr.is_number()) {
                cfg.eval.data_range_policy = "fixed";
                cfg.eval.data_range_value = dr.get<double>();
                if (!(cfg.eval.data_range_value > 0.0))
                    throw ConfigError("config: fixed eval.data_range must be positive");
            } else {
                throw ConfigError("config: eval.data_range must be \"auto\" or a number");
            }
        }
        s.finish();
    }
    if (j.contains("seeds")) {
        Section s(j["seeds"], "seeds");
        s.get("sample", cfg.sample_seed);
        s.finish();
    }

    validate_run_config(cfg);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    // A metadata file produced by a previous run is accepted as a config: the
    // echoed configuration is nested under "config".
    if (j.is_object() && j.contains("config") && j.contains("subcommand"))
        return parse_run_config(j["config"]);
    return parse_run_config(j);
}

nlohmann::json echo_run_config(const RunConfig& cfg) {
    json j;
    j["synth"] = {{"seed", cfg.synth.seed},
                  {"size", cfg.synth.size},
                  {"terrain_roughness", cfg.synth.terrain_roughness},
                  {"terrain_amplitude_m", cfg.synth.terrain_amplitude_m},
                  {"wind_mean_mps", cfg.synth.wind_mean_mps},
                  {"wind_synoptic_amplitude_mps", cfg.synth.wind_synoptic_amplitude_mps},
                  {"terrain_coupling", cfg.synth.terrain_coupling},
                  {"bias_amplitude_mps", cfg.synth.bias_amplitude_mps},
                  {"bias_length_scale_cells", cfg.synth.bias_length_scale_cells},
                  {"blur_radius_cells", cfg.synth.blur_radius_cells},
                  {"n_fields", cfg.n_fields},
                  {"n_stations", cfg.n_stations}};
    j["schedule"] = {{"T", cfg.schedule.T},
                     {"beta_start", cfg.schedule.beta_start},
                     {"beta_end", cfg.schedule.beta_end}};
    j["train"] = {{"iterations", cfg.train.iterations},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"beta1", cfg.train.beta1},
                  {"beta2", cfg.train.beta2},
                  {"epsilon", cfg.train.epsilon},
                  {"seed", cfg.train.seed},
                  {"n_layers", cfg.train.n_layers},
                  {"hidden", cfg.train.hidden},
                  {"use_terrain", cfg.train.use_terrain},
                  {"factor", cfg.train.factor},
                  {"patch_size", cfg.train.patch_size}};
    j["assimilation"] = {{"min_radius", cfg.assimilation.min_radius},
                         {"max_radius", cfg.assimilation.max_radius},
                         {"t1_terrain_m", cfg.assimilation.t1_terrain_m},
                         {"t2_wind_mps", cfg.assimilation.t2_wind_mps},
                         {"kernel_sigma_fraction", cfg.assimilation.kernel_sigma_fraction},
                         {"shear_alpha", cfg.shear_alpha},
                         {"target_height_m", cfg.target_height_m}};
    if (cfg.eval.data_range_policy == "auto")
        j["eval"] = {{"probs", cfg.eval.probs}, {"data_range", "auto"}};
    else
        j["eval"] = {{"probs", cfg.eval.probs}, {"data_range", cfg.eval.data_range_value}};
    j["seeds"] = {{"sample", cfg.sample_seed}};
    return j;
}

void validate_run_config(const RunConfig& cfg) {
    try {
        validate_synth_config(cfg.synth);
        validate_train_config(cfg.train);
        validate_radius_config(cfg.assimilation);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.n_fields < 1) throw ConfigError("config: synth.n_fields must be >= 1");
    if (cfg.n_stations < 0) throw ConfigError("config: synth.n_stations must be >= 0");
    if (cfg.schedule.T < 2) throw ConfigError("config: schedule.T must be >= 2");
    if (!(cfg.schedule.beta_start > 0.0) || !(cfg.schedule.beta_start <= cfg.schedule.beta_end) ||
        !(cfg.schedule.beta_end < 1.0))
        throw ConfigError("config: schedule betas must satisfy 0 < start <= end < 1");
    if (cfg.synth.size % cfg.train.factor != 0)
        throw ConfigError("config: synth.size must be divisible by train.factor");
    if (cfg.train.patch_size % cfg.train.factor != 0)
        throw ConfigError("config: train.patch_size must be divisible by train.factor");
    if (!(cfg.target_height_m > 0.0))
        throw ConfigError("config: assimilation.target_height_m must be positive");
    if (!std::isfinite(cfg.shear_alpha) || cfg.shear_alpha < 0.0)
        throw ConfigError("config: assimilation.shear_alpha must be >= 0");
    for (double p : cfg.eval.probs)
        if (p < 0.0 || p > 1.0) throw ConfigError("config: eval.probs must lie in [0,1]");
}

}  // namespace windsr
