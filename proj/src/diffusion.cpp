#include "windsr/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace windsr {

namespace {

void check_step(int t, const NoiseSchedule& sched) {
    if (t < 1 || t > sched.T)
        throw std::invalid_argument("diffusion: step t out of range [1, T]");
}

}  // namespace

Field2D forward_sample(const Field2D& x0, int t, const Field2D& eps, const NoiseSchedule& sched) {
    check_step(t, sched);
    require_same_shape(x0, eps, "forward_sample");
    const double ab = sched.alpha_bar[t - 1];
    const double cs = std::sqrt(ab);
    const double cn = std::sqrt(1.0 - ab);
    Field2D out(x0.rows, x0.cols, x0.cell_size_km);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = cs * x0.values[i] + cn * eps.values[i];
    return out;
}

Field2D iterated_forward(const Field2D& x0, int t, std::span<const Field2D> eps_steps,
                         const NoiseSchedule& sched) {
    check_step(t, sched);
    if (static_cast<int>(eps_steps.size()) < t)
        throw std::invalid_argument("iterated_forward: need one noise field per step");
    Field2D x = x0;
    for (int s = 1; s <= t; ++s) {
        const Field2D& eps = eps_steps[s - 1];
        require_same_shape(x, eps, "iterated_forward");
        const double ca = std::sqrt(1.0 - sched.beta[s - 1]);
        const double cb = std::sqrt(sched.beta[s - 1]);
        for (std::size_t i = 0; i < x.values.size(); ++i)
            x.values[i] = ca * x.values[i] + cb * eps.values[i];
    }
    return x;
}

Field2D iterated_forward(const Field2D& x0, int t, RngStream& rng, const NoiseSchedule& sched) {
    check_step(t, sched);
    Field2D x = x0;
    Field2D eps(x0.rows, x0.cols, x0.cell_size_km);
    for (int s = 1; s <= t; ++s) {
        rng.fill_normal(eps);
        const double ca = std::sqrt(1.0 - sched.beta[s - 1]);
        const double cb = std::sqrt(sched.beta[s - 1]);
        for (std::size_t i = 0; i < x.values.size(); ++i)
            x.values[i] = ca * x.values[i] + cb * eps.values[i];
    }
    return x;
}

double training_loss(const EpsilonModel& model, const Field2D& x0, const Conditioning& cond,
                     int t, const Field2D& eps, const NoiseSchedule& sched) {
    const Field2D xt = forward_sample(x0, t, eps, sched);
    const Field2D pred = model.predict(xt, cond, t);
    require_same_shape(pred, eps, "training_loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < eps.values.size(); ++i) {
        const double d = pred.values[i] - eps.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(eps.values.size());
}

Field2D reverse_step(const EpsilonModel& model, const Field2D& xt, int t,
                     const Conditioning& cond, const Field2D& z, const NoiseSchedule& sched) {
    check_step(t, sched);
    require_same_shape(xt, z, "reverse_step");
    const Field2D eps_hat = model.predict(xt, cond, t);
    require_same_shape(xt, eps_hat, "reverse_step");

    const int i = t - 1;
    const double k_eps = sched.beta[i] / std::sqrt(1.0 - sched.alpha_bar[i]);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha[i]);
    const double sigma = std::sqrt(sched.posterior_var[i]);

    Field2D out(xt.rows, xt.cols, xt.cell_size_km);
    for (std::size_t p = 0; p < out.values.size(); ++p)
        out.values[p] =
            (xt.values[p] - k_eps * eps_hat.values[p]) * inv_sqrt_alpha + sigma * z.values[p];
    return out;
}

Field2D sample(const EpsilonModel& model, const Conditioning& cond, const NoiseSchedule& sched,
               std::uint64_t seed, const NormStats& stats) {
    const Field2D& shape = cond.lr_upsampled;
    RngStream rng = RngStream(seed).derive("sample");

    Field2D x = normal_field(shape.rows, shape.cols, shape.cell_size_km, rng);
    Field2D z(shape.rows, shape.cols, shape.cell_size_km, 0.0);
    for (int t = sched.T; t >= 1; --t) {
        if (t > 1)
            rng.fill_normal(z);
        else
            std::fill(z.values.begin(), z.values.end(), 0.0);
        x = reverse_step(model, x, t, cond, z, sched);
    }

    for (double& v : x.values) v = std::max(0.0, v * stats.wind_std + stats.wind_mean);
    return x;
}

Field2D normalized(const Field2D& f, double mean, double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("normalized: std must be positive");
    Field2D out(f.rows, f.cols, f.cell_size_km);
    const double inv = 1.0 / sd;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        out.values[i] = (f.values[i] - mean) * inv;
    return out;
}

Conditioning make_conditioning(const Field2D& lr_upsampled_raw, const Field2D& terrain_raw,
                               const NormStats& stats, bool use_terrain) {
    Conditioning cond;
    cond.lr_upsampled = normalized(lr_upsampled_raw, stats.wind_mean, stats.wind_std);
    cond.has_terrain = use_terrain;
    if (use_terrain) {
        require_same_shape(lr_upsampled_raw, terrain_raw, "make_conditioning");
        cond.terrain = normalized(terrain_raw, stats.terrain_mean, stats.terrain_std);
    } else {
        cond.terrain = Field2D(lr_upsampled_raw.rows, lr_upsampled_raw.cols,
                               lr_upsampled_raw.cell_size_km, 0.0);
    }
    return cond;
}

}  // namespace windsr
