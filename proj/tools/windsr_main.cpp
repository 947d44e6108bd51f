// Command-line pipeline: synthetic data generation, training, plain and
// assimilated downscaling, evaluation, and the interpolation baseline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "windsr/assimilate.hpp"
#include "windsr/denoiser.hpp"
#include "windsr/grid_io.hpp"
#include "windsr/metrics.hpp"
#include "windsr/profile.hpp"
#include "windsr/resample.hpp"
#include "windsr/run_config.hpp"
#include "windsr/synth.hpp"
#include "windsr/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace windsr;

namespace {

std::string field_name(const char* stem, int index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%04d.wsrg", stem, index);
    return buf;
}

std::string stations_name(int index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "stations_%04d.csv", index);
    return buf;
}

json base_metadata(const char* subcommand, const RunConfig& cfg) {
    json meta;
    meta["tool"] = "windsr";
    meta["version"] = kVersion;
    meta["subcommand"] = subcommand;
    meta["config"] = echo_run_config(cfg);
    meta["formats"] = {{"grid", kGridFormatVersion}, {"checkpoint", kCheckpointFormatVersion}};
    return meta;
}

void write_metadata(const json& meta, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw GridIoError("cannot write metadata to " + path.string());
    out << meta.dump(2) << "\n";
}

RunConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return parse_run_config(json::object());
    return load_run_config(path);
}

NoiseSchedule schedule_for_model(const RunConfig& cfg, const DenoiserModel& model) {
    if (cfg.schedule.T != model.T)
        throw ConfigError("config: schedule.T (" + std::to_string(cfg.schedule.T) +
                          ") does not match the checkpoint's T (" + std::to_string(model.T) + ")");
    return make_linear_schedule(cfg.schedule.T, cfg.schedule.beta_start, cfg.schedule.beta_end);
}

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
    RunConfig cfg = load_config_or_default(config_path);
    fs::create_directories(out_dir);

    RngStream field_seeds(cfg.synth.seed);
    for (int i = 0; i < cfg.n_fields; ++i) {
        SynthConfig scfg = cfg.synth;
        scfg.seed = field_seeds.derive(std::uint64_t(i)).seed();

        const Field2D terrain = gen_terrain(scfg);
        const Field2D truth = gen_truth_wind(terrain, scfg);
        const Field2D sim = make_biased_sim(truth, scfg);

        write_grid(terrain, fs::path(out_dir) / field_name("terrain", i));
        write_grid(truth, fs::path(out_dir) / field_name("truth", i));
        write_grid(sim, fs::path(out_dir) / field_name("sim", i));
        write_grid(coarsen(truth, cfg.train.factor), fs::path(out_dir) / field_name("lr_truth", i));
        write_grid(coarsen(sim, cfg.train.factor), fs::path(out_dir) / field_name("lr_sim", i));
        if (cfg.n_stations > 0) {
            const auto stations = sample_stations(truth, cfg.n_stations, scfg.seed);
            write_stations(stations, fs::path(out_dir) / stations_name(i));
        }
    }

    json meta = base_metadata("gen", cfg);
    meta["outputs"] = {{"dir", out_dir}, {"n_fields", cfg.n_fields}};
    write_metadata(meta, fs::path(out_dir) / "metadata.json");
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_path) {
    RunConfig cfg = load_config_or_default(config_path);
    cfg.train.T = cfg.schedule.T;
    cfg.train.beta_start = cfg.schedule.beta_start;
    cfg.train.beta_end = cfg.schedule.beta_end;

    std::vector<fs::path> truth_files;
    for (const auto& entry : fs::directory_iterator(data_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("truth_", 0) == 0 && entry.path().extension() == ".wsrg")
            truth_files.push_back(entry.path());
    }
    std::sort(truth_files.begin(), truth_files.end());
    if (truth_files.empty())
        throw GridIoError("train: no truth_*.wsrg fields under " + data_dir);

    std::vector<PatchPair> dataset;
    for (const auto& tf : truth_files) {
        fs::path terr = tf.parent_path() / ("terrain_" + tf.filename().string().substr(6));
        const Field2D truth = read_grid(tf);
        const Field2D terrain = read_grid(terr);
        const int ps = cfg.train.patch_size;
        auto truth_patches = extract_patches(truth, ps, ps);
        auto terrain_patches = extract_patches(terrain, ps, ps);
        for (std::size_t i = 0; i < truth_patches.size(); ++i) {
            PatchPair p;
            p.hr = std::move(truth_patches[i]);
            p.lr = coarsen(p.hr, cfg.train.factor);
            p.terrain = std::move(terrain_patches[i]);
            dataset.push_back(std::move(p));
        }
    }

    TrainResult result = train_denoiser(dataset, cfg.train);
    save_checkpoint(result.model, out_path);
    write_loss_csv(result.loss_history, out_path + ".loss.csv");

    json meta = base_metadata("train", cfg);
    meta["inputs"] = {{"data", data_dir}, {"n_patches", dataset.size()}};
    meta["outputs"] = {{"checkpoint", out_path}, {"loss_csv", out_path + ".loss.csv"}};
    write_metadata(meta, out_path + ".meta.json");
    return 0;
}

int cmd_downscale(const std::string& config_path, const std::string& model_path,
                  const std::string& lr_path, const std::string& terrain_path,
                  const std::string& out_path) {
    RunConfig cfg = load_config_or_default(config_path);
    const DenoiserModel model = load_checkpoint(model_path);
    const NoiseSchedule sched = schedule_for_model(cfg, model);
    const Field2D lr = read_grid(lr_path);
    const Field2D terrain = read_grid(terrain_path);

    const Field2D out = downscale(model, sched, lr, terrain, cfg.sample_seed);
    write_grid(out, out_path);

    json meta = base_metadata("downscale", cfg);
    meta["inputs"] = {{"model", model_path}, {"lr", lr_path}, {"terrain", terrain_path}};
    meta["outputs"] = {{"grid", out_path}};
    write_metadata(meta, out_path + ".meta.json");
    return 0;
}

int cmd_assimilate(const std::string& config_path, const std::string& model_path,
                   const std::string& lr_path, const std::string& terrain_path,
                   const std::string& stations_path, const std::string& out_path) {
    RunConfig cfg = load_config_or_default(config_path);
    const DenoiserModel model = load_checkpoint(model_path);
    const NoiseSchedule sched = schedule_for_model(cfg, model);
    const Field2D lr = read_grid(lr_path);
    const Field2D terrain = read_grid(terrain_path);
    std::vector<StationObs> stations = read_stations(stations_path);
    stations = lift_stations(stations, cfg.target_height_m, PowerLawParams{cfg.shear_alpha});

    const Field2D out = assimilated_downscale(model, sched, lr, terrain, stations,
                                              cfg.assimilation, cfg.sample_seed);
    write_grid(out, out_path);

    json meta = base_metadata("assimilate", cfg);
    meta["inputs"] = {{"model", model_path},
                      {"lr", lr_path},
                      {"terrain", terrain_path},
                      {"stations", stations_path},
                      {"n_stations", stations.size()}};
    meta["outputs"] = {{"grid", out_path}};
    write_metadata(meta, out_path + ".meta.json");
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& pred_path,
             const std::string& truth_path, const std::string& holdout_path,
             const std::string& out_path) {
    RunConfig cfg = load_config_or_default(config_path);
    const Field2D pred = read_grid(pred_path);
    const Field2D truth = read_grid(truth_path);

    std::optional<PixelMask> mask;
    if (!holdout_path.empty()) {
        PixelMask m;
        for (const auto& s : read_stations(holdout_path)) m.push_back({s.row, s.col});
        mask = std::move(m);
    }
    const double range =
        cfg.eval.data_range_policy == "fixed" ? cfg.eval.data_range_value : 0.0;
    const EvalReport report = evaluate(pred, truth, range, mask);
    write_report_csv(report, out_path);
    std::cout << report_to_kv_text(report);

    json meta = base_metadata("eval", cfg);
    meta["inputs"] = {{"pred", pred_path}, {"truth", truth_path}};
    if (!holdout_path.empty()) meta["inputs"]["holdout"] = holdout_path;
    meta["outputs"] = {{"report", out_path}};

    // Distribution diagnostic: empirical quantiles of both fields.
    if (!cfg.eval.probs.empty()) {
        const auto qp = cdf_quantiles(pred, cfg.eval.probs);
        const auto qt = cdf_quantiles(truth, cfg.eval.probs);
        std::string buf = "prob,pred,truth\n";
        char line[96];
        for (std::size_t i = 0; i < cfg.eval.probs.size(); ++i) {
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", cfg.eval.probs[i], qp[i],
                          qt[i]);
            buf += line;
        }
        std::ofstream qout(out_path + ".quantiles.csv", std::ios::trunc);
        qout << buf;
        meta["outputs"]["quantiles"] = out_path + ".quantiles.csv";
    }
    write_metadata(meta, out_path + ".meta.json");
    return 0;
}

int cmd_baseline(const std::string& config_path, const std::string& method,
                 const std::string& lr_path, const std::string& out_path) {
    RunConfig cfg = load_config_or_default(config_path);
    const Field2D lr = read_grid(lr_path);
    Field2D out(1, 1, 1.0);
    if (method == "bicubic")
        out = upsample_bicubic(lr, cfg.train.factor);
    else if (method == "bilinear")
        out = upsample_bilinear(lr, cfg.train.factor);
    else
        throw std::invalid_argument("baseline: unknown method '" + method + "'");
    write_grid(out, out_path);

    json meta = base_metadata("baseline", cfg);
    meta["inputs"] = {{"lr", lr_path}, {"method", method}};
    meta["outputs"] = {{"grid", out_path}};
    write_metadata(meta, out_path + ".meta.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"windsr: terrain-aware diffusion downscaling of wind fields with "
                 "sparse-observation assimilation"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_dir, model_path, lr_path, terrain_path;
    std::string stations_path, pred_path, truth_path, holdout_path, method = "bicubic";

    auto* gen = app.add_subcommand("gen", "generate synthetic truth/sim/terrain grids");
    gen->add_option("--config", config_path, "run configuration JSON");
    gen->add_option("--out", out_path, "output directory")->required();

    auto* train = app.add_subcommand("train", "train the denoiser on generated fields");
    train->add_option("--config", config_path, "run configuration JSON");
    train->add_option("--data", data_dir, "directory with truth_/terrain_ grids")->required();
    train->add_option("--out", out_path, "checkpoint output path")->required();

    auto* down = app.add_subcommand("downscale", "plain conditional super-resolution");
    down->add_option("--config", config_path, "run configuration JSON");
    down->add_option("--model", model_path, "model checkpoint")->required();
    down->add_option("--lr", lr_path, "low-resolution input grid")->required();
    down->add_option("--terrain", terrain_path, "high-resolution terrain grid")->required();
    down->add_option("--out", out_path, "output grid path")->required();

    auto* assim = app.add_subcommand("assimilate", "downscaling with observation blending");
    assim->add_option("--config", config_path, "run configuration JSON");
    assim->add_option("--model", model_path, "model checkpoint")->required();
    assim->add_option("--lr", lr_path, "low-resolution input grid")->required();
    assim->add_option("--terrain", terrain_path, "high-resolution terrain grid")->required();
    assim->add_option("--stations", stations_path, "stations CSV")->required();
    assim->add_option("--out", out_path, "output grid path")->required();

    auto* eval_cmd = app.add_subcommand("eval", "compare a prediction against the truth");
    eval_cmd->add_option("--config", config_path, "run configuration JSON");
    eval_cmd->add_option("--pred", pred_path, "predicted grid")->required();
    eval_cmd->add_option("--truth", truth_path, "reference grid")->required();
    eval_cmd->add_option("--holdout", holdout_path, "stations CSV restricting the evaluation");
    eval_cmd->add_option("--out", out_path, "report CSV path")->required();

    auto* base = app.add_subcommand("baseline", "interpolation baseline");
    base->add_option("--config", config_path, "run configuration JSON");
    base->add_option("--method", method, "bicubic|bilinear")->capture_default_str();
    base->add_option("--lr", lr_path, "low-resolution input grid")->required();
    base->add_option("--out", out_path, "output grid path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        std::cerr << "windsr: error: " << e.get_name() << ": " << e.what() << "\n";
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }

    try {
        if (gen->parsed()) return cmd_gen(config_path, out_path);
        if (train->parsed()) return cmd_train(config_path, data_dir, out_path);
        if (down->parsed())
            return cmd_downscale(config_path, model_path, lr_path, terrain_path, out_path);
        if (assim->parsed())
            return cmd_assimilate(config_path, model_path, lr_path, terrain_path, stations_path,
                                  out_path);
        if (eval_cmd->parsed())
            return cmd_eval(config_path, pred_path, truth_path, holdout_path, out_path);
        if (base->parsed()) return cmd_baseline(config_path, method, lr_path, out_path);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& c : msg)
            if (c == '\n') c = ' ';
        std::cerr << "windsr: error: " << msg << "\n";
        return 1;
    }
    return 0;
}
