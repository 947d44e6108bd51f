// pybind11 bindings exposing the main operations to Python.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "windsr/assimilate.hpp"
#include "windsr/denoiser.hpp"
#include "windsr/diffusion.hpp"
#include "windsr/grid_io.hpp"
#include "windsr/metrics.hpp"
#include "windsr/profile.hpp"
#include "windsr/resample.hpp"
#include "windsr/schedule.hpp"
#include "windsr/synth.hpp"
#include "windsr/version.hpp"

namespace py = pybind11;
using namespace windsr;

namespace {

py::array_t<double> field_to_numpy(const Field2D& f) {
    py::array_t<double> arr({f.rows, f.cols});
    std::copy(f.values.begin(), f.values.end(), arr.mutable_data());
    return arr;
}

Field2D field_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                         double cell_size_km) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    const auto rows = static_cast<int>(a.shape(0));
    const auto cols = static_cast<int>(a.shape(1));
    std::vector<double> vals(a.data(), a.data() + std::size_t(rows) * cols);
    return Field2D(rows, cols, cell_size_km, std::move(vals));
}

std::optional<PixelMask> mask_from_pairs(const std::optional<std::vector<std::pair<int, int>>>& m) {
    if (!m) return std::nullopt;
    return PixelMask(m->begin(), m->end());
}

}  // namespace

PYBIND11_MODULE(_windsr, m) {
    m.doc() = "Diffusion-based wind-field downscaling with terrain conditioning and "
              "sparse-observation assimilation";
    m.attr("__version__") = kVersion;

    py::register_exception<GridIoError>(m, "GridIoError", PyExc_RuntimeError);

    py::class_<Field2D>(m, "Field2D")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                         double cell_size_km) { return field_from_numpy(a, cell_size_km); }),
             py::arg("values"), py::arg("cell_size_km") = 2.0)
        .def_readonly("rows", &Field2D::rows)
        .def_readonly("cols", &Field2D::cols)
        .def_readonly("cell_size_km", &Field2D::cell_size_km)
        .def("to_numpy", &field_to_numpy)
        .def("min", &Field2D::min)
        .def("max", &Field2D::max)
        .def("mean", &Field2D::mean)
        .def("__repr__", [](const Field2D& f) {
            return "<Field2D " + std::to_string(f.rows) + "x" + std::to_string(f.cols) + " @ " +
                   std::to_string(f.cell_size_km) + " km>";
        });

    py::class_<StationObs>(m, "StationObs")
        .def(py::init([](std::string id, int row, int col, double height_m, double speed_mps) {
                 return StationObs{std::move(id), row, col, height_m, speed_mps};
             }),
             py::arg("id"), py::arg("row"), py::arg("col"), py::arg("height_m") = 80.0,
             py::arg("speed_mps") = 0.0)
        .def_readwrite("id", &StationObs::id)
        .def_readwrite("row", &StationObs::row)
        .def_readwrite("col", &StationObs::col)
        .def_readwrite("height_m", &StationObs::height_m)
        .def_readwrite("speed_mps", &StationObs::speed_mps);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("seed", &SynthConfig::seed)
        .def_readwrite("size", &SynthConfig::size)
        .def_readwrite("terrain_roughness", &SynthConfig::terrain_roughness)
        .def_readwrite("terrain_amplitude_m", &SynthConfig::terrain_amplitude_m)
        .def_readwrite("wind_mean_mps", &SynthConfig::wind_mean_mps)
        .def_readwrite("wind_synoptic_amplitude_mps", &SynthConfig::wind_synoptic_amplitude_mps)
        .def_readwrite("terrain_coupling", &SynthConfig::terrain_coupling)
        .def_readwrite("bias_amplitude_mps", &SynthConfig::bias_amplitude_mps)
        .def_readwrite("bias_length_scale_cells", &SynthConfig::bias_length_scale_cells)
        .def_readwrite("blur_radius_cells", &SynthConfig::blur_radius_cells);

    py::class_<RadiusConfig>(m, "RadiusConfig")
        .def(py::init<>())
        .def_readwrite("min_radius", &RadiusConfig::min_radius)
        .def_readwrite("max_radius", &RadiusConfig::max_radius)
        .def_readwrite("t1_terrain_m", &RadiusConfig::t1_terrain_m)
        .def_readwrite("t2_wind_mps", &RadiusConfig::t2_wind_mps)
        .def_readwrite("kernel_sigma_fraction", &RadiusConfig::kernel_sigma_fraction);

    py::class_<NoiseSchedule>(m, "NoiseSchedule")
        .def_readonly("T", &NoiseSchedule::T)
        .def_readonly("beta", &NoiseSchedule::beta)
        .def_readonly("alpha", &NoiseSchedule::alpha)
        .def_readonly("alpha_bar", &NoiseSchedule::alpha_bar)
        .def_readonly("posterior_var", &NoiseSchedule::posterior_var);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("iterations", &TrainConfig::iterations)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("beta1", &TrainConfig::beta1)
        .def_readwrite("beta2", &TrainConfig::beta2)
        .def_readwrite("epsilon", &TrainConfig::epsilon)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("T", &TrainConfig::T)
        .def_readwrite("beta_start", &TrainConfig::beta_start)
        .def_readwrite("beta_end", &TrainConfig::beta_end)
        .def_readwrite("n_layers", &TrainConfig::n_layers)
        .def_readwrite("hidden", &TrainConfig::hidden)
        .def_readwrite("use_terrain", &TrainConfig::use_terrain)
        .def_readwrite("factor", &TrainConfig::factor)
        .def_readwrite("patch_size", &TrainConfig::patch_size);

    py::class_<DenoiserModel>(m, "DenoiserModel")
        .def_readonly("T", &DenoiserModel::T)
        .def_readonly("hidden", &DenoiserModel::hidden)
        .def_readonly("use_terrain", &DenoiserModel::use_terrain)
        .def("parameter_count", &DenoiserModel::parameter_count);

    py::class_<PatchPair>(m, "PatchPair")
        .def(py::init([](Field2D hr, Field2D lr, Field2D terrain) {
                 PatchPair p{std::move(hr), std::move(lr), std::move(terrain)};
                 validate_patch_pair(p);
                 return p;
             }),
             py::arg("hr"), py::arg("lr"), py::arg("terrain"))
        .def_readonly("hr", &PatchPair::hr)
        .def_readonly("lr", &PatchPair::lr)
        .def_readonly("terrain", &PatchPair::terrain);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("mae", &EvalReport::mae)
        .def_readonly("rmse", &EvalReport::rmse)
        .def_readonly("pearson_r", &EvalReport::pearson_r)
        .def_readonly("pearson_defined", &EvalReport::pearson_defined)
        .def_readonly("psnr_db", &EvalReport::psnr_db)
        .def_readonly("ssim", &EvalReport::ssim)
        .def_readonly("data_range", &EvalReport::data_range)
        .def_readonly("n_pixels", &EvalReport::n_pixels);

    // Grid and resampling operations.
    m.def("coarsen", &coarsen, py::arg("field"), py::arg("factor"));
    m.def("upsample_bilinear", &upsample_bilinear, py::arg("field"), py::arg("factor"));
    m.def("upsample_bicubic", &upsample_bicubic, py::arg("field"), py::arg("factor"));
    m.def("regrid", &regrid, py::arg("src"), py::arg("dst_rows"), py::arg("dst_cols"),
          py::arg("dst_cell_km"));
    m.def("extract_patches", &extract_patches, py::arg("field"), py::arg("patch"),
          py::arg("stride"));

    // Synthetic data.
    m.def("gen_terrain", &gen_terrain, py::arg("cfg"));
    m.def("gen_truth_wind", &gen_truth_wind, py::arg("terrain"), py::arg("cfg"));
    m.def("make_biased_sim", &make_biased_sim, py::arg("truth"), py::arg("cfg"));
    m.def("sample_stations", &sample_stations, py::arg("truth"), py::arg("k"), py::arg("seed"));

    // Diffusion machinery.
    m.def("make_linear_schedule", &make_linear_schedule, py::arg("T"), py::arg("beta_start"),
          py::arg("beta_end"));
    m.def(
        "forward_sample",
        [](const Field2D& x0, int t, const Field2D& eps, const NoiseSchedule& s) {
            return forward_sample(x0, t, eps, s);
        },
        py::arg("x0"), py::arg("t"), py::arg("eps"), py::arg("schedule"));
    m.def("train_denoiser",
          [](const std::vector<PatchPair>& dataset, const TrainConfig& cfg) {
              TrainResult r = train_denoiser(dataset, cfg);
              return py::make_tuple(std::move(r.model), std::move(r.loss_history));
          },
          py::arg("dataset"), py::arg("cfg"));

    // Assimilation pipeline.
    m.def("interpolate_observations", &interpolate_observations, py::arg("stations"),
          py::arg("rows"), py::arg("cols"), py::arg("cell_km") = 2.0);
    m.def("dynamic_impact_radius", &dynamic_impact_radius, py::arg("row"), py::arg("col"),
          py::arg("terrain"), py::arg("sim_wind"), py::arg("cfg"));
    m.def(
        "build_soft_mask",
        [](const std::vector<StationObs>& sts, const std::vector<int>& radii, int rows, int cols,
           double cell, const RadiusConfig& cfg) {
            return build_soft_mask(sts, radii, rows, cols, cell, cfg).weights;
        },
        py::arg("stations"), py::arg("radii"), py::arg("rows"), py::arg("cols"),
        py::arg("cell_km"), py::arg("cfg"));
    m.def(
        "blend",
        [](const Field2D& obs, const Field2D& sim, const Field2D& weights) {
            return blend(obs, sim, SoftMask{weights});
        },
        py::arg("obs_field"), py::arg("sim_field"), py::arg("weights"));
    m.def("assimilation_composite",
          [](const Field2D& sim_hr, const Field2D& terrain, const std::vector<StationObs>& sts,
             const RadiusConfig& cfg) {
              std::vector<int> radii;
              Field2D comp = assimilation_composite(sim_hr, terrain, sts, cfg, &radii);
              return py::make_tuple(std::move(comp), std::move(radii));
          },
          py::arg("sim_hr"), py::arg("terrain"), py::arg("stations"), py::arg("cfg"));
    m.def("downscale", &downscale, py::arg("model"), py::arg("schedule"), py::arg("lr_sim"),
          py::arg("terrain"), py::arg("seed"));
    m.def("assimilated_downscale", &assimilated_downscale, py::arg("model"), py::arg("schedule"),
          py::arg("lr_sim"), py::arg("terrain"), py::arg("stations"), py::arg("cfg"),
          py::arg("seed"));

    // Metrics.
    m.def(
        "mae_rmse",
        [](const Field2D& a, const Field2D& b,
           const std::optional<std::vector<std::pair<int, int>>>& mask) {
            return mae_rmse(a, b, mask_from_pairs(mask));
        },
        py::arg("a"), py::arg("b"), py::arg("mask") = py::none());
    m.def(
        "pearson",
        [](const Field2D& a, const Field2D& b,
           const std::optional<std::vector<std::pair<int, int>>>& mask) {
            return pearson(a, b, mask_from_pairs(mask));
        },
        py::arg("a"), py::arg("b"), py::arg("mask") = py::none());
    m.def(
        "psnr",
        [](const Field2D& a, const Field2D& b, double data_range,
           const std::optional<std::vector<std::pair<int, int>>>& mask) {
            return psnr(a, b, data_range, mask_from_pairs(mask));
        },
        py::arg("a"), py::arg("b"), py::arg("data_range"), py::arg("mask") = py::none());
    m.def("ssim", &ssim, py::arg("a"), py::arg("b"), py::arg("data_range"));
    m.def("cdf_quantiles", &cdf_quantiles, py::arg("field"), py::arg("probs"));
    m.def(
        "evaluate",
        [](const Field2D& pred, const Field2D& truth, double data_range,
           const std::optional<std::vector<std::pair<int, int>>>& mask) {
            return evaluate(pred, truth, data_range, mask_from_pairs(mask));
        },
        py::arg("pred"), py::arg("truth"), py::arg("data_range") = 0.0,
        py::arg("mask") = py::none());

    // Vertical profile.
    m.def(
        "power_law",
        [](double u_ref, double z_ref, double z_target, double alpha) {
            return power_law(u_ref, z_ref, z_target, PowerLawParams{alpha});
        },
        py::arg("u_ref"), py::arg("z_ref"), py::arg("z_target"), py::arg("alpha") = 1.0 / 7.0);
    m.def(
        "lift_stations",
        [](const std::vector<StationObs>& sts, double z_target, double alpha) {
            return lift_stations(sts, z_target, PowerLawParams{alpha});
        },
        py::arg("stations"), py::arg("z_target"), py::arg("alpha") = 1.0 / 7.0);

    // Persistence.
    m.def("read_grid", &read_grid, py::arg("path"));
    m.def("write_grid", &write_grid, py::arg("field"), py::arg("path"));
    m.def("read_stations", &read_stations, py::arg("path"));
    m.def("write_stations", &write_stations, py::arg("stations"), py::arg("path"));
    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
    m.def("save_checkpoint", &save_checkpoint, py::arg("model"), py::arg("path"));
}
