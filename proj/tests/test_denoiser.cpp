#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "windsr/denoiser.hpp"
#include "windsr/resample.hpp"
#include "windsr/rng.hpp"
#include "windsr/synth.hpp"

using namespace windsr;

namespace {

Conditioning random_cond(int rows, int cols, RngStream& rng) {
    Conditioning c;
    c.lr_upsampled = normal_field(rows, cols, 1.0, rng);
    c.terrain = normal_field(rows, cols, 1.0, rng);
    return c;
}

double silu_ref(double x) { return x / (1.0 + std::exp(-x)); }

// Naive nested-loop forward oracle for the whole stack (zero padding).
Field2D forward_oracle(const DenoiserModel& m, const Field2D& xt, const Conditioning& cond,
                       int t) {
    const int rows = xt.rows, cols = xt.cols;
    std::vector<std::vector<double>> chans;
    chans.push_back(xt.values);
    chans.push_back(cond.lr_upsampled.values);
    if (m.use_terrain) chans.push_back(cond.terrain.values);

    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const ConvLayer& L = m.layers[l];
        const int half = L.ksize / 2;
        std::vector<std::vector<double>> next(std::size_t(L.out_ch),
                                              std::vector<double>(std::size_t(rows) * cols));
        for (int oc = 0; oc < L.out_ch; ++oc)
            for (int y = 0; y < rows; ++y)
                for (int x = 0; x < cols; ++x) {
                    double acc = L.b[std::size_t(oc)];
                    for (int ic = 0; ic < L.in_ch; ++ic)
                        for (int ky = 0; ky < L.ksize; ++ky)
                            for (int kx = 0; kx < L.ksize; ++kx) {
                                const int iy = y + ky - half;
                                const int ix = x + kx - half;
                                if (iy < 0 || iy >= rows || ix < 0 || ix >= cols) continue;
                                acc += L.w[L.w_index(oc, ic, ky, kx)] *
                                       chans[std::size_t(ic)][std::size_t(iy) * cols + ix];
                            }
                    if (l == 0) acc += m.time_emb[std::size_t(t - 1) * m.hidden + oc];
                    next[std::size_t(oc)][std::size_t(y) * cols + x] = acc;
                }
        if (l + 1 < m.layers.size())
            for (auto& plane : next)
                for (double& v : plane) v = silu_ref(v);
        chans = std::move(next);
    }
    return Field2D(rows, cols, xt.cell_size_km, chans[0]);
}

std::vector<double*> all_params(DenoiserModel& m) {
    std::vector<double*> ps;
    for (auto& l : m.layers) {
        for (auto& w : l.w) ps.push_back(&w);
        for (auto& b : l.b) ps.push_back(&b);
    }
    for (auto& e : m.time_emb) ps.push_back(&e);
    return ps;
}

}  // namespace

TEST_CASE("denoiser_forward: all-zero parameters give a zero field") {
    DenoiserModel m = init_denoiser(8, 3, 6, true, 1);
    for (auto& l : m.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    std::fill(m.time_emb.begin(), m.time_emb.end(), 0.0);
    RngStream rng(3);
    Field2D xt = normal_field(8, 8, 1.0, rng);
    Conditioning cond = random_cond(8, 8, rng);
    Field2D out = denoiser_forward(m, xt, cond, 4);
    for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("denoiser_forward: final-layer bias shifts every pixel by the delta") {
    DenoiserModel m = init_denoiser(8, 3, 6, true, 2);
    RngStream rng(4);
    Field2D xt = normal_field(8, 8, 1.0, rng);
    Conditioning cond = random_cond(8, 8, rng);
    Field2D base = denoiser_forward(m, xt, cond, 5);
    const double delta = 0.625;
    m.layers.back().b[0] += delta;
    Field2D shifted = denoiser_forward(m, xt, cond, 5);
    for (std::size_t i = 0; i < base.values.size(); ++i)
        CHECK(shifted.values[i] == doctest::Approx(base.values[i] + delta).epsilon(1e-14));
}

TEST_CASE("denoiser_forward: matches the naive nested-loop oracle") {
    DenoiserModel m = init_denoiser(6, 2, 4, true, 5);
    RngStream rng(6);
    Field2D xt = normal_field(8, 8, 1.0, rng);
    Conditioning cond = random_cond(8, 8, rng);
    for (int t : {1, 3, 6}) {
        Field2D got = denoiser_forward(m, xt, cond, t);
        Field2D want = forward_oracle(m, xt, cond, t);
        for (std::size_t i = 0; i < got.values.size(); ++i)
            CHECK(got.values[i] == doctest::Approx(want.values[i]).epsilon(1e-10));
    }
}

TEST_CASE("denoiser_backward: zero gradients when the prediction equals eps") {
    DenoiserModel m = init_denoiser(8, 3, 6, true, 7);
    for (auto& l : m.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    NoiseSchedule s = make_linear_schedule(8, 0.05, 0.3);
    RngStream rng(8);
    std::vector<TrainSample> batch(1);
    batch[0].x0 = normal_field(8, 8, 1.0, rng);
    batch[0].cond = random_cond(8, 8, rng);
    batch[0].t = 3;
    batch[0].eps = Field2D(8, 8, 1.0, 0.0);  // prediction (all zeros) == eps
    auto [g, loss] = denoiser_backward(m, batch, s);
    CHECK(loss == 0.0);
    for (const auto& w : g.w)
        for (double v : w) CHECK(v == 0.0);
    for (const auto& b : g.b)
        for (double v : b) CHECK(v == 0.0);
    for (double v : g.time_emb) CHECK(v == 0.0);
}

TEST_CASE("denoiser_backward: closed-form gradient of a 1x1 linear layer") {
    // Single linear layer, 1x1 kernel, one pixel: L = (w * x - eps)^2 with
    // x the noised pixel; dL/dw = 2 (w x - eps) x.
    DenoiserModel m;
    m.T = 4;
    m.hidden = 1;
    m.use_terrain = false;
    ConvLayer L;
    L.in_ch = 2;
    L.out_ch = 1;
    L.ksize = 1;
    L.w = {0.8, 0.0};  // only the x_t channel contributes
    L.b = {0.0};
    m.layers.push_back(L);
    m.time_emb.assign(4, 0.0);

    NoiseSchedule s = make_linear_schedule(4, 0.1, 0.4);
    std::vector<TrainSample> batch(1);
    batch[0].x0 = Field2D(1, 1, 1.0, {1.7});
    batch[0].cond.lr_upsampled = Field2D(1, 1, 1.0, 0.0);
    batch[0].cond.terrain = Field2D(1, 1, 1.0, 0.0);
    batch[0].cond.has_terrain = false;
    batch[0].t = 2;
    batch[0].eps = Field2D(1, 1, 1.0, {-0.4});

    const double x = std::sqrt(0.72) * 1.7 + std::sqrt(0.28) * -0.4;
    auto [g, loss] = denoiser_backward(m, batch, s);
    CHECK(loss == doctest::Approx((0.8 * x + 0.4) * (0.8 * x + 0.4)).epsilon(1e-14));
    CHECK(g.w[0][0] == doctest::Approx(2.0 * (0.8 * x + 0.4) * x).epsilon(1e-14));
}

TEST_CASE("denoiser_backward: all parameter classes pass central finite differences") {
    DenoiserModel m = init_denoiser(6, 3, 4, true, 11);
    NoiseSchedule s = make_linear_schedule(6, 0.05, 0.3);
    RngStream rng(12);
    std::vector<TrainSample> batch(2);
    for (auto& b : batch) {
        b.x0 = normal_field(6, 6, 1.0, rng);
        b.cond = random_cond(6, 6, rng);
        b.t = 1 + int(rng.uniform_int(6));
        b.eps = normal_field(6, 6, 1.0, rng);
    }

    auto [g, loss0] = denoiser_backward(m, batch, s);
    std::vector<double> analytic;
    for (const auto& w : g.w) analytic.insert(analytic.end(), w.begin(), w.end());
    for (const auto& b : g.b) analytic.insert(analytic.end(), b.begin(), b.end());
    // layer params first, then embedding, matching all_params order below
    std::vector<double> flat;
    for (std::size_t l = 0; l < g.w.size(); ++l) {
        flat.insert(flat.end(), g.w[l].begin(), g.w[l].end());
        flat.insert(flat.end(), g.b[l].begin(), g.b[l].end());
    }
    flat.insert(flat.end(), g.time_emb.begin(), g.time_emb.end());

    auto params = all_params(m);
    REQUIRE(params.size() == flat.size());
    const double h = 1e-4;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = *params[i];
        *params[i] = orig + h;
        const double lp = denoiser_backward(m, batch, s).second;
        *params[i] = orig - h;
        const double lm = denoiser_backward(m, batch, s).second;
        *params[i] = orig;
        const double numeric = (lp - lm) / (2.0 * h);
        const double denom = std::max({std::fabs(numeric), std::fabs(flat[i]), 1e-8});
        max_rel = std::max(max_rel, std::fabs(numeric - flat[i]) / denom);
    }
    CHECK(max_rel < 1e-3);
}

TEST_CASE("denoiser_forward: translation covariance with wraparound padding") {
    DenoiserModel m = init_denoiser(6, 3, 5, true, 13);
    m.padding = PaddingMode::Wrap;
    RngStream rng(14);
    Field2D xt = normal_field(8, 8, 1.0, rng);
    Conditioning cond = random_cond(8, 8, rng);

    auto shift = [](const Field2D& f) {
        Field2D out(f.rows, f.cols, f.cell_size_km);
        for (int r = 0; r < f.rows; ++r)
            for (int c = 0; c < f.cols; ++c)
                out.at((r + 1) % f.rows, (c + 1) % f.cols) = f.at(r, c);
        return out;
    };

    Field2D base = denoiser_forward(m, xt, cond, 2);
    Conditioning shifted_cond;
    shifted_cond.lr_upsampled = shift(cond.lr_upsampled);
    shifted_cond.terrain = shift(cond.terrain);
    Field2D shifted_out = denoiser_forward(m, shift(xt), shifted_cond, 2);
    Field2D expect = shift(base);
    for (std::size_t i = 0; i < expect.values.size(); ++i)
        CHECK(shifted_out.values[i] == doctest::Approx(expect.values[i]).epsilon(1e-12));
}

namespace {

std::vector<PatchPair> toy_dataset(int n_patches, int hr_size, int factor, std::uint64_t seed) {
    std::vector<PatchPair> out;
    out.reserve(std::size_t(n_patches));
    SynthConfig cfg;
    cfg.size = hr_size;
    cfg.terrain_amplitude_m = 300.0;
    cfg.wind_synoptic_amplitude_mps = 2.0;
    cfg.terrain_coupling = 0.8;
    for (int i = 0; i < n_patches; ++i) {
        cfg.seed = seed + std::uint64_t(i);
        PatchPair p;
        p.terrain = gen_terrain(cfg);
        p.hr = gen_truth_wind(p.terrain, cfg);
        p.lr = coarsen(p.hr, factor);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

TEST_CASE("train_denoiser: zero learning rate leaves parameters untouched") {
    auto data = toy_dataset(4, 32, 4, 100);
    TrainConfig cfg;
    cfg.iterations = 5;
    cfg.batch_size = 2;
    cfg.learning_rate = 0.0;
    cfg.T = 8;
    cfg.beta_end = 0.3;
    cfg.n_layers = 2;
    cfg.hidden = 4;
    cfg.seed = 21;
    TrainResult r = train_denoiser(data, cfg);
    DenoiserModel fresh = init_denoiser(cfg.T, cfg.n_layers, cfg.hidden, cfg.use_terrain, cfg.seed);
    for (std::size_t l = 0; l < fresh.layers.size(); ++l) {
        CHECK(r.model.layers[l].w == fresh.layers[l].w);
        CHECK(r.model.layers[l].b == fresh.layers[l].b);
    }
    CHECK(r.model.time_emb == fresh.time_emb);
}

TEST_CASE("train_denoiser: bit-reproducible loss history under a fixed seed") {
    auto data = toy_dataset(4, 32, 4, 200);
    TrainConfig cfg;
    cfg.iterations = 8;
    cfg.batch_size = 2;
    cfg.T = 8;
    cfg.beta_end = 0.3;
    cfg.n_layers = 2;
    cfg.hidden = 4;
    cfg.seed = 33;
    TrainResult a = train_denoiser(data, cfg);
    TrainResult b = train_denoiser(data, cfg);
    CHECK(a.loss_history == b.loss_history);
    for (std::size_t l = 0; l < a.model.layers.size(); ++l)
        CHECK(a.model.layers[l].w == b.model.layers[l].w);
    CHECK_THROWS_AS(train_denoiser({}, cfg), std::invalid_argument);
}

TEST_CASE("train_denoiser: loss drops by at least 30% on the toy benchmark" *
          doctest::timeout(600)) {
    auto data = toy_dataset(500, 32, 4, 300);
    TrainConfig cfg;
    cfg.iterations = 2000;
    cfg.batch_size = 4;
    cfg.T = 50;
    cfg.beta_end = 0.2;
    cfg.n_layers = 2;
    cfg.hidden = 8;
    cfg.seed = 44;
    TrainResult r = train_denoiser(data, cfg);
    REQUIRE(int(r.loss_history.size()) == cfg.iterations);
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < 100; ++i) {
        head += r.loss_history[std::size_t(i)];
        tail += r.loss_history[r.loss_history.size() - 100 + std::size_t(i)];
    }
    head /= 100.0;
    tail /= 100.0;
    CHECK(tail < 0.7 * head);
    for (const auto& l : r.model.layers)
        for (double w : l.w) CHECK(std::isfinite(w));
}
