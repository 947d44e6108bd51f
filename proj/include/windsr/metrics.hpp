#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "windsr/field.hpp"

namespace windsr {

/// Pixel subset for masked evaluation (held-out station cells).
using PixelMask = std::vector<std::pair<int, int>>;

/// Quantitative comparison of a prediction against a reference field.
struct EvalReport {
    double mae = 0.0;
    double rmse = 0.0;
    double pearson_r = 0.0;
    bool pearson_defined = false;
    double psnr_db = 0.0;   // +infinity for identical inputs
    double ssim = 1.0;
    double data_range = 0.0;
    long n_pixels = 0;
};

/// MAE and RMSE over the mask (all pixels when absent).
std::pair<double, double> mae_rmse(const Field2D& a, const Field2D& b,
                                   const std::optional<PixelMask>& mask = std::nullopt);

/// Sample Pearson correlation; throws on zero-variance input.
double pearson(const Field2D& a, const Field2D& b,
               const std::optional<PixelMask>& mask = std::nullopt);

/// 20 log10(range) - 10 log10(MSE), +infinity when the inputs are identical.
double psnr(const Field2D& a, const Field2D& b, double data_range,
            const std::optional<PixelMask>& mask = std::nullopt);

/// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), C1=(0.01 L)^2,
/// C2=(0.03 L)^2, evaluated where the full window fits.
double ssim(const Field2D& a, const Field2D& b, double data_range);

/// Empirical quantiles with linear interpolation between order statistics.
std::vector<double> cdf_quantiles(const Field2D& field, const std::vector<double>& probs);

/// Full report; data_range <= 0 means "derive from the truth field's max-min".
/// SSIM is always computed on the full fields; the other metrics honor the
/// mask. pearson_defined is false when the inputs are constant over the mask.
EvalReport evaluate(const Field2D& pred, const Field2D& truth, double data_range = 0.0,
                    const std::optional<PixelMask>& mask = std::nullopt);

}  // namespace windsr
