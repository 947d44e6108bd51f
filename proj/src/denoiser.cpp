#include "windsr/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "windsr/resample.hpp"

namespace windsr {

namespace {

// Channel-major scratch tensor used by the conv stack.
struct Tensor {
    int ch = 0, rows = 0, cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int ch_, int rows_, int cols_)
        : ch(ch_), rows(rows_), cols(cols_),
          v(static_cast<std::size_t>(ch_) * rows_ * cols_, 0.0) {}

    double* plane(int c) { return v.data() + static_cast<std::size_t>(c) * rows * cols; }
    const double* plane(int c) const {
        return v.data() + static_cast<std::size_t>(c) * rows * cols;
    }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double silu(double x) { return x * sigmoid(x); }
double silu_grad(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

void conv_forward(const ConvLayer& L, const Tensor& in, Tensor& out, PaddingMode pad) {
    const int rows = in.rows, cols = in.cols;
    const int half = L.ksize / 2;
    out.zero();
    for (int oc = 0; oc < L.out_ch; ++oc) {
        double* op = out.plane(oc);
        const double bias = L.b[static_cast<std::size_t>(oc)];
        for (int i = 0; i < rows * cols; ++i) op[i] = bias;
    }
    if (pad == PaddingMode::Zero) {
        for (int oc = 0; oc < L.out_ch; ++oc) {
            double* op = out.plane(oc);
            for (int ic = 0; ic < L.in_ch; ++ic) {
                const double* ip = in.plane(ic);
                for (int ky = 0; ky < L.ksize; ++ky) {
                    const int dy = ky - half;
                    const int y0 = std::max(0, -dy);
                    const int y1 = rows - 1 - std::max(0, dy);
                    for (int kx = 0; kx < L.ksize; ++kx) {
                        const int dx = kx - half;
                        const int x0 = std::max(0, -dx);
                        const int x1 = cols - 1 - std::max(0, dx);
                        const double w = L.w[L.w_index(oc, ic, ky, kx)];
                        for (int y = y0; y <= y1; ++y) {
                            double* orow = op + static_cast<std::size_t>(y) * cols;
                            const double* irow =
                                ip + static_cast<std::size_t>(y + dy) * cols + dx;
                            for (int x = x0; x <= x1; ++x) orow[x] += w * irow[x];
                        }
                    }
                }
            }
        }
    } else {
        for (int oc = 0; oc < L.out_ch; ++oc) {
            double* op = out.plane(oc);
            for (int ic = 0; ic < L.in_ch; ++ic) {
                const double* ip = in.plane(ic);
                for (int ky = 0; ky < L.ksize; ++ky)
                    for (int kx = 0; kx < L.ksize; ++kx) {
                        const double w = L.w[L.w_index(oc, ic, ky, kx)];
                        const int dy = ky - half, dx = kx - half;
                        for (int y = 0; y < rows; ++y) {
                            const double* irow =
                                ip + static_cast<std::size_t>(wrap(y + dy, rows)) * cols;
                            double* orow = op + static_cast<std::size_t>(y) * cols;
                            for (int x = 0; x < cols; ++x)
                                orow[x] += w * irow[wrap(x + dx, cols)];
                        }
                    }
            }
        }
    }
}

// Accumulates dW/dB for one layer and (optionally) the gradient w.r.t. the
// layer input.
void conv_backward(const ConvLayer& L, const Tensor& in, const Tensor& d_out,
                   std::vector<double>& dw, std::vector<double>& db, Tensor* d_in,
                   PaddingMode pad) {
    const int rows = in.rows, cols = in.cols;
    const int half = L.ksize / 2;
    if (d_in != nullptr) d_in->zero();

    for (int oc = 0; oc < L.out_ch; ++oc) {
        const double* dop = d_out.plane(oc);
        double acc_b = 0.0;
        for (int i = 0; i < rows * cols; ++i) acc_b += dop[i];
        db[static_cast<std::size_t>(oc)] += acc_b;
    }

    if (pad == PaddingMode::Zero) {
        for (int oc = 0; oc < L.out_ch; ++oc) {
            const double* dop = d_out.plane(oc);
            for (int ic = 0; ic < L.in_ch; ++ic) {
                const double* ip = in.plane(ic);
                double* dip = d_in ? d_in->plane(ic) : nullptr;
                for (int ky = 0; ky < L.ksize; ++ky) {
                    const int dy = ky - half;
                    const int y0 = std::max(0, -dy);
                    const int y1 = rows - 1 - std::max(0, dy);
                    for (int kx = 0; kx < L.ksize; ++kx) {
                        const int dx = kx - half;
                        const int x0 = std::max(0, -dx);
                        const int x1 = cols - 1 - std::max(0, dx);
                        const double w = L.w[L.w_index(oc, ic, ky, kx)];
                        double acc_w = 0.0;
                        for (int y = y0; y <= y1; ++y) {
                            const double* drow = dop + static_cast<std::size_t>(y) * cols;
                            const double* irow =
                                ip + static_cast<std::size_t>(y + dy) * cols + dx;
                            double* dirow =
                                dip ? dip + static_cast<std::size_t>(y + dy) * cols + dx
                                    : nullptr;
                            for (int x = x0; x <= x1; ++x) {
                                acc_w += drow[x] * irow[x];
                                if (dirow) dirow[x] += w * drow[x];
                            }
                        }
                        dw[L.w_index(oc, ic, ky, kx)] += acc_w;
                    }
                }
            }
        }
    } else {
        for (int oc = 0; oc < L.out_ch; ++oc) {
            const double* dop = d_out.plane(oc);
            for (int ic = 0; ic < L.in_ch; ++ic) {
                const double* ip = in.plane(ic);
                double* dip = d_in ? d_in->plane(ic) : nullptr;
                for (int ky = 0; ky < L.ksize; ++ky)
                    for (int kx = 0; kx < L.ksize; ++kx) {
                        const int dy = ky - half, dx = kx - half;
                        const double w = L.w[L.w_index(oc, ic, ky, kx)];
                        double acc_w = 0.0;
                        for (int y = 0; y < rows; ++y) {
                            const int iy = wrap(y + dy, rows);
                            const double* drow = dop + static_cast<std::size_t>(y) * cols;
                            const double* irow = ip + static_cast<std::size_t>(iy) * cols;
                            double* dirow =
                                dip ? dip + static_cast<std::size_t>(iy) * cols : nullptr;
                            for (int x = 0; x < cols; ++x) {
                                const int ix = wrap(x + dx, cols);
                                acc_w += drow[x] * irow[ix];
                                if (dirow) dirow[ix] += w * drow[x];
                            }
                        }
                        dw[L.w_index(oc, ic, ky, kx)] += acc_w;
                    }
            }
        }
    }
}

Tensor stack_input(const DenoiserModel& model, const Field2D& xt, const Conditioning& cond) {
    require_same_shape(xt, cond.lr_upsampled, "denoiser input");
    if (model.use_terrain) require_same_shape(xt, cond.terrain, "denoiser input");
    Tensor in(model.input_channels(), xt.rows, xt.cols);
    std::copy(xt.values.begin(), xt.values.end(), in.plane(0));
    std::copy(cond.lr_upsampled.values.begin(), cond.lr_upsampled.values.end(), in.plane(1));
    if (model.use_terrain)
        std::copy(cond.terrain.values.begin(), cond.terrain.values.end(), in.plane(2));
    return in;
}

// Runs the stack, keeping pre-activations and activations for backprop.
// pre[l] is the conv output of layer l (embedding already added for l = 0);
// act[l] is the nonlinearity applied to pre[l] (last layer has no act).
void run_stack(const DenoiserModel& model, const Tensor& input, int t,
               std::vector<Tensor>& pre, std::vector<Tensor>& act) {
    const int n = static_cast<int>(model.layers.size());
    pre.resize(n);
    act.resize(n);
    const Tensor* cur = &input;
    for (int l = 0; l < n; ++l) {
        const ConvLayer& L = model.layers[static_cast<std::size_t>(l)];
        pre[l] = Tensor(L.out_ch, input.rows, input.cols);
        conv_forward(L, *cur, pre[l], model.padding);
        if (l == 0) {
            const double* emb =
                model.time_emb.data() + static_cast<std::size_t>(t - 1) * model.hidden;
            for (int oc = 0; oc < L.out_ch; ++oc) {
                double* p = pre[l].plane(oc);
                const double e = emb[oc];
                for (int i = 0; i < input.rows * input.cols; ++i) p[i] += e;
            }
        }
        if (l < n - 1) {
            act[l] = pre[l];
            for (double& x : act[l].v) x = silu(x);
            cur = &act[l];
        }
    }
}

}  // namespace

std::size_t DenoiserModel::parameter_count() const {
    std::size_t n = time_emb.size();
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

DenoiserModel init_denoiser(int T, int n_layers, int hidden, bool use_terrain,
                            std::uint64_t seed) {
    if (T < 2) throw std::invalid_argument("init_denoiser: T must be >= 2");
    if (n_layers < 2) throw std::invalid_argument("init_denoiser: need at least 2 layers");
    if (hidden < 1) throw std::invalid_argument("init_denoiser: hidden must be >= 1");

    DenoiserModel m;
    m.T = T;
    m.hidden = hidden;
    m.use_terrain = use_terrain;
    RngStream rng = RngStream(seed).derive("init");

    const int in0 = use_terrain ? 3 : 2;
    for (int l = 0; l < n_layers; ++l) {
        ConvLayer L;
        L.in_ch = l == 0 ? in0 : hidden;
        L.out_ch = l == n_layers - 1 ? 1 : hidden;
        L.ksize = 3;
        L.w.resize(static_cast<std::size_t>(L.in_ch) * L.out_ch * L.ksize * L.ksize);
        L.b.assign(static_cast<std::size_t>(L.out_ch), 0.0);
        const double sd = 1.0 / std::sqrt(static_cast<double>(L.in_ch) * L.ksize * L.ksize);
        for (double& w : L.w) w = sd * rng.normal();
        m.layers.push_back(std::move(L));
    }
    m.time_emb.resize(static_cast<std::size_t>(T) * hidden);
    for (double& e : m.time_emb) e = 0.01 * rng.normal();
    return m;
}

Field2D denoiser_forward(const DenoiserModel& model, const Field2D& xt,
                         const Conditioning& cond, int t) {
    if (t < 1 || t > model.T)
        throw std::invalid_argument("denoiser_forward: t out of range");
    const Tensor input = stack_input(model, xt, cond);
    std::vector<Tensor> pre, act;
    run_stack(model, input, t, pre, act);
    const Tensor& last = pre.back();
    Field2D out(xt.rows, xt.cols, xt.cell_size_km);
    std::copy(last.plane(0), last.plane(0) + xt.size(), out.values.begin());
    return out;
}

std::pair<DenoiserGradients, double> denoiser_backward(const DenoiserModel& model,
                                                       std::span<const TrainSample> batch,
                                                       const NoiseSchedule& sched) {
    if (batch.empty()) throw std::invalid_argument("denoiser_backward: empty batch");
    const int n_layers = static_cast<int>(model.layers.size());

    DenoiserGradients g;
    g.w.resize(model.layers.size());
    g.b.resize(model.layers.size());
    for (int l = 0; l < n_layers; ++l) {
        g.w[l].assign(model.layers[l].w.size(), 0.0);
        g.b[l].assign(model.layers[l].b.size(), 0.0);
    }
    g.time_emb.assign(model.time_emb.size(), 0.0);

    double loss = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    std::vector<Tensor> pre, act;
    for (const TrainSample& s : batch) {
        const Field2D xt = forward_sample(s.x0, s.t, s.eps, sched);
        const Tensor input = stack_input(model, xt, s.cond);
        run_stack(model, input, s.t, pre, act);

        const int rows = xt.rows, cols = xt.cols;
        const auto npix = static_cast<double>(xt.size());
        const Tensor& predicted = pre.back();

        // d(batch loss)/d(prediction); per-sample loss is the pixel-mean
        // squared error.
        Tensor d_cur(1, rows, cols);
        double sample_loss = 0.0;
        for (std::size_t i = 0; i < xt.size(); ++i) {
            const double diff = predicted.v[i] - s.eps.values[i];
            sample_loss += diff * diff;
            d_cur.v[i] = 2.0 * diff / npix * inv_batch;
        }
        loss += sample_loss / npix * inv_batch;

        for (int l = n_layers - 1; l >= 0; --l) {
            const ConvLayer& L = model.layers[static_cast<std::size_t>(l)];
            const Tensor& layer_in = l == 0 ? input : act[l - 1];
            Tensor d_in;
            if (l > 0) d_in = Tensor(L.in_ch, rows, cols);
            conv_backward(L, layer_in, d_cur, g.w[l], g.b[l], l > 0 ? &d_in : nullptr,
                          model.padding);
            if (l == 0) {
                double* demb =
                    g.time_emb.data() + static_cast<std::size_t>(s.t - 1) * model.hidden;
                for (int oc = 0; oc < L.out_ch; ++oc) {
                    const double* p = d_cur.plane(oc);
                    double acc = 0.0;
                    for (int i = 0; i < rows * cols; ++i) acc += p[i];
                    demb[oc] += acc;
                }
            } else {
                // Through the nonlinearity of the layer below.
                const Tensor& h = pre[l - 1];
                for (std::size_t i = 0; i < d_in.v.size(); ++i)
                    d_in.v[i] *= silu_grad(h.v[i]);
                d_cur = std::move(d_in);
            }
        }
    }
    return {std::move(g), loss};
}

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
    if (cfg.batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(cfg.learning_rate >= 0.0))
        throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
    if (cfg.T < 2) throw std::invalid_argument("TrainConfig: T must be >= 2");
    if (cfg.factor < 2) throw std::invalid_argument("TrainConfig: factor must be >= 2");
    if (cfg.n_layers < 2 || cfg.hidden < 1)
        throw std::invalid_argument("TrainConfig: invalid architecture");
}

namespace {

struct AdamState {
    std::vector<std::vector<double>> mw, vw, mb, vb;
    std::vector<double> me, ve;
    long step = 0;
};

void adam_update(std::vector<double>& theta, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, const TrainConfig& cfg,
                 double bc1, double bc2) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        theta[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

}  // namespace

TrainResult train_denoiser(const std::vector<PatchPair>& dataset, const TrainConfig& cfg) {
    validate_train_config(cfg);
    if (dataset.empty()) throw std::invalid_argument("train_denoiser: empty dataset");
    for (const auto& p : dataset) validate_patch_pair(p);

    // Dataset statistics: wind over HR truth pixels, terrain separately.
    double wsum = 0.0, wsq = 0.0, tsum = 0.0, tsq = 0.0;
    std::size_t wn = 0, tn = 0;
    for (const auto& p : dataset) {
        for (double v : p.hr.values) {
            wsum += v;
            wsq += v * v;
        }
        wn += p.hr.size();
        for (double v : p.terrain.values) {
            tsum += v;
            tsq += v * v;
        }
        tn += p.terrain.size();
    }
    NormStats stats;
    stats.wind_mean = wsum / static_cast<double>(wn);
    stats.terrain_mean = tsum / static_cast<double>(tn);
    const double wvar = wsq / static_cast<double>(wn) - stats.wind_mean * stats.wind_mean;
    const double tvar = tsq / static_cast<double>(tn) - stats.terrain_mean * stats.terrain_mean;
    stats.wind_std = wvar > 0.0 ? std::sqrt(wvar) : 1.0;
    stats.terrain_std = tvar > 0.0 ? std::sqrt(tvar) : 1.0;

    // Normalized training tensors.
    std::vector<Field2D> x0s;
    std::vector<Conditioning> conds;
    x0s.reserve(dataset.size());
    conds.reserve(dataset.size());
    for (const auto& p : dataset) {
        const int factor = p.hr.rows / p.lr.rows;
        x0s.push_back(normalized(p.hr, stats.wind_mean, stats.wind_std));
        conds.push_back(make_conditioning(upsample_bilinear(p.lr, factor), p.terrain, stats,
                                          cfg.use_terrain));
    }

    const NoiseSchedule sched = make_linear_schedule(cfg.T, cfg.beta_start, cfg.beta_end);
    DenoiserModel model =
        init_denoiser(cfg.T, cfg.n_layers, cfg.hidden, cfg.use_terrain, cfg.seed);
    model.norm = stats;

    AdamState adam;
    adam.mw.resize(model.layers.size());
    adam.vw.resize(model.layers.size());
    adam.mb.resize(model.layers.size());
    adam.vb.resize(model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        adam.mw[l].assign(model.layers[l].w.size(), 0.0);
        adam.vw[l].assign(model.layers[l].w.size(), 0.0);
        adam.mb[l].assign(model.layers[l].b.size(), 0.0);
        adam.vb[l].assign(model.layers[l].b.size(), 0.0);
    }
    adam.me.assign(model.time_emb.size(), 0.0);
    adam.ve.assign(model.time_emb.size(), 0.0);

    RngStream rng = RngStream(cfg.seed).derive("train");
    std::vector<TrainSample> batch(static_cast<std::size_t>(cfg.batch_size));
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(cfg.iterations));

    for (int it = 0; it < cfg.iterations; ++it) {
        for (int b = 0; b < cfg.batch_size; ++b) {
            const auto idx = static_cast<std::size_t>(rng.uniform_int(dataset.size()));
            TrainSample& s = batch[static_cast<std::size_t>(b)];
            s.x0 = x0s[idx];
            s.cond = conds[idx];
            s.t = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cfg.T)));
            s.eps = normal_field(s.x0.rows, s.x0.cols, s.x0.cell_size_km, rng);
        }
        auto [grads, loss] = denoiser_backward(model, batch, sched);

        adam.step += 1;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.step));
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            adam_update(model.layers[l].w, grads.w[l], adam.mw[l], adam.vw[l], cfg, bc1, bc2);
            adam_update(model.layers[l].b, grads.b[l], adam.mb[l], adam.vb[l], cfg, bc1, bc2);
        }
        adam_update(model.time_emb, grads.time_emb, adam.me, adam.ve, cfg, bc1, bc2);
        history.push_back(loss);
    }
    return TrainResult{std::move(model), std::move(history)};
}

}  // namespace windsr
