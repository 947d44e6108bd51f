#include "windsr/resample.hpp"

#include <algorithm>
#include <cmath>

namespace windsr {

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Keys cubic convolution kernel with a = -0.5 (Catmull-Rom).
double cubic_weight(double x) {
    const double a = -0.5;
    x = std::fabs(x);
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

}  // namespace

Field2D coarsen(const Field2D& field, int factor) {
    if (factor < 2) throw std::invalid_argument("coarsen: factor must be >= 2");
    if (field.rows % factor != 0 || field.cols % factor != 0)
        throw std::invalid_argument("coarsen: dimensions not divisible by factor");

    Field2D out(field.rows / factor, field.cols / factor, field.cell_size_km * factor);
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            double s = 0.0;
            for (int dr = 0; dr < factor; ++dr)
                for (int dc = 0; dc < factor; ++dc)
                    s += field.at(r * factor + dr, c * factor + dc);
            out.at(r, c) = s * inv;
        }
    }
    return out;
}

double sample_bilinear(const Field2D& field, double r, double c) {
    r = std::clamp(r, 0.0, static_cast<double>(field.rows - 1));
    c = std::clamp(c, 0.0, static_cast<double>(field.cols - 1));
    const int r0 = static_cast<int>(std::floor(r));
    const int c0 = static_cast<int>(std::floor(c));
    const int r1 = std::min(r0 + 1, field.rows - 1);
    const int c1 = std::min(c0 + 1, field.cols - 1);
    const double fr = r - r0;
    const double fc = c - c0;
    const double top = field.at(r0, c0) * (1.0 - fc) + field.at(r0, c1) * fc;
    const double bot = field.at(r1, c0) * (1.0 - fc) + field.at(r1, c1) * fc;
    return top * (1.0 - fr) + bot * fr;
}

double sample_bicubic(const Field2D& field, double r, double c) {
    r = std::clamp(r, 0.0, static_cast<double>(field.rows - 1));
    c = std::clamp(c, 0.0, static_cast<double>(field.cols - 1));
    const int r0 = static_cast<int>(std::floor(r));
    const int c0 = static_cast<int>(std::floor(c));
    const double fr = r - r0;
    const double fc = c - c0;
    double acc = 0.0;
    for (int i = -1; i <= 2; ++i) {
        const double wr = cubic_weight(fr - i);
        if (wr == 0.0) continue;
        const int rr = clampi(r0 + i, 0, field.rows - 1);
        for (int j = -1; j <= 2; ++j) {
            const double wc = cubic_weight(fc - j);
            if (wc == 0.0) continue;
            const int cc = clampi(c0 + j, 0, field.cols - 1);
            acc += wr * wc * field.at(rr, cc);
        }
    }
    return acc;
}

namespace {

template <typename SampleFn>
Field2D upsample_with(const Field2D& field, int factor, SampleFn&& sample) {
    if (factor < 2) throw std::invalid_argument("upsample: factor must be >= 2");
    Field2D out(field.rows * factor, field.cols * factor, field.cell_size_km / factor);
    const double inv = 1.0 / factor;
    for (int r = 0; r < out.rows; ++r) {
        const double sr = (r + 0.5) * inv - 0.5;
        for (int c = 0; c < out.cols; ++c) {
            const double sc = (c + 0.5) * inv - 0.5;
            out.at(r, c) = sample(field, sr, sc);
        }
    }
    return out;
}

}  // namespace

Field2D upsample_bilinear(const Field2D& field, int factor) {
    return upsample_with(field, factor,
                         [](const Field2D& f, double r, double c) { return sample_bilinear(f, r, c); });
}

Field2D upsample_bicubic(const Field2D& field, int factor) {
    return upsample_with(field, factor,
                         [](const Field2D& f, double r, double c) { return sample_bicubic(f, r, c); });
}

Field2D regrid(const Field2D& src, int dst_rows, int dst_cols, double dst_cell_km) {
    if (dst_rows < 1 || dst_cols < 1)
        throw std::invalid_argument("regrid: destination dims must be positive");
    if (!(dst_cell_km > 0.0))
        throw std::invalid_argument("regrid: destination cell size must be positive");
    const double tol = 1.0 + 1e-9;
    if (dst_rows * dst_cell_km > src.rows * src.cell_size_km * tol ||
        dst_cols * dst_cell_km > src.cols * src.cell_size_km * tol)
        throw std::invalid_argument("regrid: destination extent exceeds source extent");

    Field2D out(dst_rows, dst_cols, dst_cell_km);
    const double ratio = dst_cell_km / src.cell_size_km;
    for (int r = 0; r < dst_rows; ++r) {
        const double sr = (r + 0.5) * ratio - 0.5;
        for (int c = 0; c < dst_cols; ++c) {
            const double sc = (c + 0.5) * ratio - 0.5;
            out.at(r, c) = sample_bilinear(src, sr, sc);
        }
    }
    return out;
}

std::vector<Field2D> extract_patches(const Field2D& field, int patch, int stride) {
    if (patch < 1) throw std::invalid_argument("extract_patches: patch must be positive");
    if (stride < 1) throw std::invalid_argument("extract_patches: stride must be >= 1");
    if (patch > field.rows || patch > field.cols)
        throw std::invalid_argument("extract_patches: patch larger than field");

    std::vector<Field2D> patches;
    const int nr = (field.rows - patch) / stride + 1;
    const int nc = (field.cols - patch) / stride + 1;
    patches.reserve(static_cast<std::size_t>(nr) * nc);
    for (int pr = 0; pr < nr; ++pr) {
        for (int pc = 0; pc < nc; ++pc) {
            Field2D p(patch, patch, field.cell_size_km);
            const int r0 = pr * stride;
            const int c0 = pc * stride;
            for (int r = 0; r < patch; ++r)
                for (int c = 0; c < patch; ++c)
                    p.at(r, c) = field.at(r0 + r, c0 + c);
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

}  // namespace windsr
