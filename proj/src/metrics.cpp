#include "windsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace windsr {

namespace {

std::vector<double> masked_diffs(const Field2D& a, const Field2D& b, const PixelMask& mask) {
    std::vector<double> out;
    out.reserve(mask.size());
    for (const auto& [r, c] : mask) {
        if (!a.in_bounds(r, c))
            throw std::invalid_argument("mask pixel out of bounds");
        out.push_back(a.at(r, c) - b.at(r, c));
    }
    return out;
}

void gather(const Field2D& f, const std::optional<PixelMask>& mask, std::vector<double>& out) {
    out.clear();
    if (!mask) {
        out = f.values;
        return;
    }
    out.reserve(mask->size());
    for (const auto& [r, c] : *mask) {
        if (!f.in_bounds(r, c))
            throw std::invalid_argument("mask pixel out of bounds");
        out.push_back(f.at(r, c));
    }
}

double mean_sq_err(const Field2D& a, const Field2D& b, const std::optional<PixelMask>& mask) {
    double acc = 0.0;
    std::size_t n = 0;
    if (!mask) {
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            const double d = a.values[i] - b.values[i];
            acc += d * d;
        }
        n = a.values.size();
    } else {
        const auto diffs = masked_diffs(a, b, *mask);
        for (double d : diffs) acc += d * d;
        n = diffs.size();
    }
    if (n == 0) throw std::invalid_argument("metrics: empty mask");
    return acc / static_cast<double>(n);
}

// 11x11 Gaussian window, sigma 1.5, normalized to sum 1.
constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::vector<double> ssim_window() {
    std::vector<double> w(kSsimWindow * kSsimWindow);
    const int h = kSsimWindow / 2;
    double sum = 0.0;
    for (int y = 0; y < kSsimWindow; ++y)
        for (int x = 0; x < kSsimWindow; ++x) {
            const double dy = y - h, dx = x - h;
            const double g = std::exp(-(dy * dy + dx * dx) / (2.0 * kSsimSigma * kSsimSigma));
            w[static_cast<std::size_t>(y) * kSsimWindow + x] = g;
            sum += g;
        }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

std::pair<double, double> mae_rmse(const Field2D& a, const Field2D& b,
                                   const std::optional<PixelMask>& mask) {
    require_same_shape(a, b, "mae_rmse");
    if (mask && mask->empty()) throw std::invalid_argument("mae_rmse: empty mask");
    double abs_acc = 0.0, sq_acc = 0.0;
    std::size_t n = 0;
    if (!mask) {
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            const double d = a.values[i] - b.values[i];
            abs_acc += std::fabs(d);
            sq_acc += d * d;
        }
        n = a.values.size();
    } else {
        const auto diffs = masked_diffs(a, b, *mask);
        for (double d : diffs) {
            abs_acc += std::fabs(d);
            sq_acc += d * d;
        }
        n = diffs.size();
    }
    const double inv = 1.0 / static_cast<double>(n);
    return {abs_acc * inv, std::sqrt(sq_acc * inv)};
}

double pearson(const Field2D& a, const Field2D& b, const std::optional<PixelMask>& mask) {
    require_same_shape(a, b, "pearson");
    std::vector<double> va, vb;
    gather(a, mask, va);
    gather(b, mask, vb);
    if (va.size() < 2) throw std::invalid_argument("pearson: need at least 2 pixels");

    const double n = static_cast<double>(va.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        ma += va[i];
        mb += vb[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double da = va[i] - ma;
        const double db = vb[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw std::invalid_argument("pearson: zero-variance input");
    return sab / std::sqrt(saa * sbb);
}

double psnr(const Field2D& a, const Field2D& b, double data_range,
            const std::optional<PixelMask>& mask) {
    require_same_shape(a, b, "psnr");
    if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data_range must be positive");
    const double mse = mean_sq_err(a, b, mask);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(data_range) - 10.0 * std::log10(mse);
}

double ssim(const Field2D& a, const Field2D& b, double data_range) {
    require_same_shape(a, b, "ssim");
    if (!(data_range > 0.0)) throw std::invalid_argument("ssim: data_range must be positive");
    if (a.rows < kSsimWindow || a.cols < kSsimWindow)
        throw std::invalid_argument("ssim: field smaller than the 11x11 window");

    static const std::vector<double> win = ssim_window();
    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);
    const int h = kSsimWindow / 2;

    double acc = 0.0;
    long count = 0;
    for (int r = h; r < a.rows - h; ++r) {
        for (int c = h; c < a.cols - h; ++c) {
            double mu_a = 0.0, mu_b = 0.0, e_aa = 0.0, e_bb = 0.0, e_ab = 0.0;
            const double* w = win.data();
            for (int dy = -h; dy <= h; ++dy)
                for (int dx = -h; dx <= h; ++dx, ++w) {
                    const double va = a.at(r + dy, c + dx);
                    const double vb = b.at(r + dy, c + dx);
                    mu_a += *w * va;
                    mu_b += *w * vb;
                    e_aa += *w * va * va;
                    e_bb += *w * vb * vb;
                    e_ab += *w * va * vb;
                }
            const double var_a = e_aa - mu_a * mu_a;
            const double var_b = e_bb - mu_b * mu_b;
            const double cov = e_ab - mu_a * mu_b;
            const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            acc += num / den;
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

std::vector<double> cdf_quantiles(const Field2D& field, const std::vector<double>& probs) {
    if (field.values.empty()) throw std::invalid_argument("cdf_quantiles: empty field");
    for (double p : probs)
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("cdf_quantiles: probs must lie in [0,1]");

    std::vector<double> sorted = field.values;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();

    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) {
        const double h = p * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, n - 1);
        out.push_back(sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]));
    }
    return out;
}

EvalReport evaluate(const Field2D& pred, const Field2D& truth, double data_range,
                    const std::optional<PixelMask>& mask) {
    require_same_shape(pred, truth, "evaluate");
    EvalReport rep;
    rep.data_range = data_range > 0.0 ? data_range : truth.max() - truth.min();
    if (!(rep.data_range > 0.0)) rep.data_range = 1.0;  // constant reference field

    std::tie(rep.mae, rep.rmse) = mae_rmse(pred, truth, mask);
    rep.psnr_db = psnr(pred, truth, rep.data_range, mask);
    rep.ssim = ssim(pred, truth, rep.data_range);
    rep.n_pixels = mask ? static_cast<long>(mask->size()) : static_cast<long>(pred.size());
    try {
        rep.pearson_r = pearson(pred, truth, mask);
        rep.pearson_defined = true;
    } catch (const std::invalid_argument&) {
        rep.pearson_r = std::numeric_limits<double>::quiet_NaN();
        rep.pearson_defined = false;
    }
    return rep;
}

}  // namespace windsr
