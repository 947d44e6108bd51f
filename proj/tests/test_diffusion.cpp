#include <doctest.h>

#include <cmath>
#include <vector>

#include "windsr/diffusion.hpp"
#include "windsr/rng.hpp"
#include "windsr/schedule.hpp"

using namespace windsr;

namespace {

struct StubEps final : EpsilonModel {
    explicit StubEps(Field2D out) : value(std::move(out)) {}
    Field2D predict(const Field2D&, const Conditioning&, int) const override { return value; }
    Field2D value;
};

struct ZeroEps final : EpsilonModel {
    Field2D predict(const Field2D& xt, const Conditioning&, int) const override {
        return Field2D(xt.rows, xt.cols, xt.cell_size_km, 0.0);
    }
};

Conditioning dummy_cond(int rows, int cols) {
    Conditioning c;
    c.lr_upsampled = Field2D(rows, cols, 1.0, 0.0);
    c.terrain = Field2D(rows, cols, 1.0, 0.0);
    return c;
}

}  // namespace

TEST_CASE("make_linear_schedule: spec sequences") {
    NoiseSchedule s = make_linear_schedule(4, 0.1, 0.4);
    const double want_beta[] = {0.1, 0.2, 0.3, 0.4};
    const double want_abar[] = {0.9, 0.72, 0.504, 0.3024};
    for (int i = 0; i < 4; ++i) {
        CHECK(s.beta[i] == doctest::Approx(want_beta[i]).epsilon(1e-14));
        CHECK(s.alpha_bar[i] == doctest::Approx(want_abar[i]).epsilon(1e-13));
    }
    CHECK(s.posterior_var[0] == 0.0);

    NoiseSchedule flat = make_linear_schedule(2, 0.5, 0.5);
    CHECK(flat.alpha_bar[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(flat.alpha_bar[1] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("make_linear_schedule: long schedule against extended-precision oracle") {
    NoiseSchedule s = make_linear_schedule(1000, 1e-4, 0.02);
    long double prod = 1.0L;
    const long double step = (0.02L - 1e-4L) / 999.0L;
    for (int i = 0; i < 1000; ++i) {
        prod *= 1.0L - (1e-4L + step * i);
        CHECK(std::fabs(double(prod) - s.alpha_bar[i]) <=
              1e-10 * std::fabs(double(prod)));
    }
    CHECK(s.alpha_bar.back() < 0.001);
}

TEST_CASE("make_linear_schedule: invariants and errors") {
    NoiseSchedule s = make_linear_schedule(50, 1e-3, 0.3);
    double prod = 1.0;
    for (int i = 0; i < s.T; ++i) {
        CHECK(s.beta[i] > 0.0);
        CHECK(s.beta[i] < 1.0);
        if (i > 0) {
            CHECK(s.beta[i] >= s.beta[i - 1]);
            CHECK(s.alpha_bar[i] < s.alpha_bar[i - 1]);
        }
        prod *= s.alpha[i];
        CHECK(std::fabs(prod - s.alpha_bar[i]) < 1e-12);
        CHECK(s.posterior_var[i] >= 0.0);
    }
    CHECK_THROWS_AS(make_linear_schedule(1, 1e-4, 0.02), std::invalid_argument);
    CHECK_THROWS_AS(make_linear_schedule(10, 0.0, 0.02), std::invalid_argument);
    CHECK_THROWS_AS(make_linear_schedule(10, 0.3, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(make_linear_schedule(10, 0.1, 1.0), std::invalid_argument);
}

TEST_CASE("forward_sample: zero-noise and zero-signal limits") {
    NoiseSchedule s = make_linear_schedule(4, 0.1, 0.4);
    Field2D x0(3, 3, 1.0, 2.0);
    Field2D eps0(3, 3, 1.0, 0.0);
    Field2D xt = forward_sample(x0, 2, eps0, s);
    for (double v : xt.values) CHECK(v == doctest::Approx(std::sqrt(0.72) * 2.0).epsilon(1e-14));

    Field2D z0(3, 3, 1.0, 0.0);
    Field2D eps(3, 3, 1.0, -1.25);
    Field2D xn = forward_sample(z0, 2, eps, s);
    for (double v : xn.values)
        CHECK(v == doctest::Approx(std::sqrt(0.28) * -1.25).epsilon(1e-14));

    CHECK_THROWS_AS(forward_sample(x0, 0, eps0, s), std::invalid_argument);
    CHECK_THROWS_AS(forward_sample(x0, 5, eps0, s), std::invalid_argument);
    CHECK_THROWS_AS(forward_sample(x0, 1, Field2D(2, 2, 1.0, 0.0), s), std::invalid_argument);
}

TEST_CASE("forward_sample: Monte Carlo moments at alpha_bar = 0.72") {
    NoiseSchedule s = make_linear_schedule(4, 0.1, 0.4);
    Field2D x0(2, 2, 1.0, {1.0, -2.0, 3.0, 0.5});
    const int n = 100000;
    RngStream rng(123);
    Field2D eps(2, 2, 1.0);
    std::vector<double> mean(4, 0.0), sq(4, 0.0);
    for (int i = 0; i < n; ++i) {
        rng.fill_normal(eps);
        Field2D xt = forward_sample(x0, 2, eps, s);
        for (int p = 0; p < 4; ++p) {
            mean[p] += xt.values[p];
            sq[p] += xt.values[p] * xt.values[p];
        }
    }
    const double sd = std::sqrt(0.28);
    for (int p = 0; p < 4; ++p) {
        mean[p] /= n;
        const double var = sq[p] / n - mean[p] * mean[p];
        const double want_mean = std::sqrt(0.72) * x0.values[p];
        CHECK(std::fabs(mean[p] - want_mean) < 3.0 * sd / std::sqrt(double(n)));
        CHECK(var == doctest::Approx(0.28).epsilon(0.05));
    }
}

TEST_CASE("iterated_forward: single-step identity and zero-noise product") {
    NoiseSchedule s = make_linear_schedule(4, 0.1, 0.4);
    Field2D x0(2, 2, 1.0, {1.0, 2.0, -1.0, 0.25});
    RngStream rng(7);
    Field2D e1 = normal_field(2, 2, 1.0, rng);
    std::vector<Field2D> steps = {e1};
    Field2D it1 = iterated_forward(x0, 1, steps, s);
    Field2D fw1 = forward_sample(x0, 1, e1, s);
    for (int p = 0; p < 4; ++p)
        CHECK(it1.values[p] == doctest::Approx(fw1.values[p]).epsilon(1e-14));

    std::vector<Field2D> zeros(3, Field2D(2, 2, 1.0, 0.0));
    Field2D it3 = iterated_forward(x0, 3, zeros, s);
    for (int p = 0; p < 4; ++p)
        CHECK(it3.values[p] == doctest::Approx(std::sqrt(0.504) * x0.values[p]).epsilon(1e-14));
}

TEST_CASE("iterated_forward: agrees with the closed-form marginal in distribution") {
    NoiseSchedule s = make_linear_schedule(10, 0.05, 0.3);
    Field2D x0(2, 2, 1.0, {2.0, -1.0, 0.5, 3.0});
    const int n = 20000;
    const int t = 3;
    RngStream rng_a(1), rng_b(2);
    std::vector<double> ma(4, 0.0), va(4, 0.0), mb(4, 0.0), vb(4, 0.0);
    Field2D eps(2, 2, 1.0);
    for (int i = 0; i < n; ++i) {
        Field2D a = iterated_forward(x0, t, rng_a, s);
        rng_b.fill_normal(eps);
        Field2D b = forward_sample(x0, t, eps, s);
        for (int p = 0; p < 4; ++p) {
            ma[p] += a.values[p];
            va[p] += a.values[p] * a.values[p];
            mb[p] += b.values[p];
            vb[p] += b.values[p] * b.values[p];
        }
    }
    for (int p = 0; p < 4; ++p) {
        ma[p] /= n;
        mb[p] /= n;
        va[p] = va[p] / n - ma[p] * ma[p];
        vb[p] = vb[p] / n - mb[p] * mb[p];
        CHECK(ma[p] == doctest::Approx(mb[p]).epsilon(0.05));
        CHECK(va[p] == doctest::Approx(vb[p]).epsilon(0.05));
    }
}

TEST_CASE("training_loss: exact-prediction stub and unit-noise cases") {
    NoiseSchedule s = make_linear_schedule(4, 0.1, 0.4);
    Conditioning cond = dummy_cond(2, 2);
    Field2D x0(2, 2, 1.0, {1.0, 2.0, 3.0, 4.0});
    RngStream rng(5);
    Field2D eps = normal_field(2, 2, 1.0, rng);

    CHECK(training_loss(StubEps(eps), x0, cond, 2, eps, s) == 0.0);

    Field2D pm(2, 2, 1.0, {1.0, -1.0, 1.0, -1.0});
    CHECK(training_loss(ZeroEps(), x0, cond, 2, pm, s) == doctest::Approx(1.0).epsilon(1e-15));

    // Independent elementwise-MSE oracle for an arbitrary stub prediction.
    Field2D pred = normal_field(2, 2, 1.0, rng);
    double want = 0.0;
    for (int p = 0; p < 4; ++p) {
        const double d = pred.values[p] - eps.values[p];
        want += d * d;
    }
    want /= 4.0;
    CHECK(training_loss(StubEps(pred), x0, cond, 3, eps, s) ==
          doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("reverse_step: exact inversion at t = 1 with the true noise") {
    NoiseSchedule s = make_linear_schedule(4, 0.1, 0.4);
    Conditioning cond = dummy_cond(2, 2);
    Field2D x0(2, 2, 1.0, {0.5, -0.25, 1.5, 2.0});
    RngStream rng(11);
    Field2D eps = normal_field(2, 2, 1.0, rng);
    Field2D x1 = forward_sample(x0, 1, eps, s);
    Field2D z(2, 2, 1.0, 0.0);
    Field2D rec = reverse_step(StubEps(eps), x1, 1, cond, z, s);
    for (int p = 0; p < 4; ++p)
        CHECK(rec.values[p] == doctest::Approx(x0.values[p]).epsilon(1e-13));
}

TEST_CASE("reverse_step: zero eps-hat rescaling and stub formula oracle") {
    NoiseSchedule s = make_linear_schedule(4, 0.1, 0.4);
    Conditioning cond = dummy_cond(2, 2);
    Field2D xt(2, 2, 1.0, {1.0, 2.0, -3.0, 0.0});
    Field2D z(2, 2, 1.0, 0.0);

    Field2D r = reverse_step(ZeroEps(), xt, 3, cond, z, s);
    for (int p = 0; p < 4; ++p)
        CHECK(r.values[p] == doctest::Approx(xt.values[p] / std::sqrt(0.7)).epsilon(1e-13));

    // mu with a constant eps-hat = 0.75 at t = 3, hand evaluated.
    Field2D ehat(2, 2, 1.0, 0.75);
    Field2D rz(2, 2, 1.0, {0.2, -0.1, 0.4, 0.0});
    Field2D got = reverse_step(StubEps(ehat), xt, 3, cond, rz, s);
    const double k = 0.3 / std::sqrt(1.0 - 0.504);
    const double sigma = std::sqrt((1.0 - 0.72) / (1.0 - 0.504) * 0.3);
    for (int p = 0; p < 4; ++p) {
        const double mu = (xt.values[p] - k * 0.75) / std::sqrt(0.7);
        CHECK(got.values[p] == doctest::Approx(mu + sigma * rz.values[p]).epsilon(1e-12));
    }
}

TEST_CASE("sample: deterministic in seed, clamped at zero") {
    NoiseSchedule s = make_linear_schedule(8, 0.05, 0.3);
    Conditioning cond = dummy_cond(4, 4);
    NormStats stats;
    stats.wind_mean = 1.0;
    stats.wind_std = 2.0;
    ZeroEps model;
    Field2D a = sample(model, cond, s, 77, stats);
    Field2D b = sample(model, cond, s, 77, stats);
    CHECK(a.values == b.values);
    Field2D c = sample(model, cond, s, 78, stats);
    CHECK(a.values != c.values);
    CHECK(a.min() >= 0.0);
}

namespace {

// Closed-form optimal denoiser for i.i.d. N(mu0, sigma0^2) pixels:
// E[eps | x_t] = sqrt(1-abar) (x_t - sqrt(abar) mu0) / (abar sigma0^2 + 1 - abar).
struct GaussianOptimal final : EpsilonModel {
    GaussianOptimal(double mu, double sigma, const NoiseSchedule& s)
        : mu0(mu), var0(sigma * sigma), sched(&s) {}
    Field2D predict(const Field2D& xt, const Conditioning&, int t) const override {
        const double ab = sched->alpha_bar[t - 1];
        const double denom = ab * var0 + 1.0 - ab;
        const double scale = std::sqrt(1.0 - ab) / denom;
        Field2D out(xt.rows, xt.cols, xt.cell_size_km);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] = scale * (xt.values[i] - std::sqrt(ab) * mu0);
        return out;
    }
    double mu0, var0;
    const NoiseSchedule* sched;
};

}  // namespace

TEST_CASE("sample: Gaussian toy with the closed-form optimal denoiser") {
    const double mu0 = 5.0, sigma0 = 1.0;
    NoiseSchedule s = make_linear_schedule(400, 1e-4, 0.02);
    GaussianOptimal model(mu0, sigma0, s);
    Conditioning cond = dummy_cond(50, 50);
    NormStats identity_stats;  // mean 0, std 1: raw pixel space
    Field2D out = sample(model, cond, s, 2024, identity_stats);

    double m = out.mean();
    double var = 0.0;
    for (double v : out.values) var += (v - m) * (v - m);
    var /= double(out.size());
    CHECK(m == doctest::Approx(mu0).epsilon(0.05));
    CHECK(var == doctest::Approx(sigma0 * sigma0).epsilon(0.10));
}
