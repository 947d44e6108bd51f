#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace windsr {

/// Rectangular grid of real values with a physical cell size.
/// Storage is row-major; the origin is the lower-left (south-west) corner.
/// Units depend on role: m/s for wind speed, m for elevation.
struct Field2D {
    int rows = 0;
    int cols = 0;
    double cell_size_km = 1.0;
    std::vector<double> values;

    Field2D() = default;

    Field2D(int rows_, int cols_, double cell_km, double fill = 0.0)
        : rows(rows_), cols(cols_), cell_size_km(cell_km),
          values(static_cast<std::size_t>(check_dims(rows_, cols_, cell_km)) , fill) {}

    Field2D(int rows_, int cols_, double cell_km, std::vector<double> vals)
        : rows(rows_), cols(cols_), cell_size_km(cell_km), values(std::move(vals)) {
        check_dims(rows_, cols_, cell_km);
        validate();
    }

    [[nodiscard]] std::size_t size() const { return values.size(); }

    [[nodiscard]] std::size_t idx(int r, int c) const {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
               static_cast<std::size_t>(c);
    }

    [[nodiscard]] double& at(int r, int c) { return values[idx(r, c)]; }
    [[nodiscard]] const double& at(int r, int c) const { return values[idx(r, c)]; }

    [[nodiscard]] bool in_bounds(int r, int c) const {
        return r >= 0 && r < rows && c >= 0 && c < cols;
    }

    [[nodiscard]] bool same_shape(const Field2D& other) const {
        return rows == other.rows && cols == other.cols;
    }

    [[nodiscard]] double min() const {
        double m = values.front();
        for (double v : values) m = v < m ? v : m;
        return m;
    }

    [[nodiscard]] double max() const {
        double m = values.front();
        for (double v : values) m = v > m ? v : m;
        return m;
    }

    [[nodiscard]] double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }

    /// Throws if the value array is malformed or carries non-finite entries.
    void validate() const {
        if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
            throw std::invalid_argument("Field2D: values length does not match rows*cols");
        for (double v : values)
            if (!std::isfinite(v))
                throw std::invalid_argument("Field2D: non-finite value");
    }

private:
    static std::size_t check_dims(int r, int c, double cell_km) {
        if (r <= 0 || c <= 0)
            throw std::invalid_argument("Field2D: dimensions must be positive");
        if (!(cell_km > 0.0) || !std::isfinite(cell_km))
            throw std::invalid_argument("Field2D: cell_size_km must be positive");
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(c);
    }
};

inline void require_same_shape(const Field2D& a, const Field2D& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                    std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                    " vs " + std::to_string(b.rows) + "x" +
                                    std::to_string(b.cols) + ")");
}

/// Paired low/high-resolution training sample with the matching terrain patch.
struct PatchPair {
    Field2D hr;
    Field2D lr;
    Field2D terrain;
};

inline void validate_patch_pair(const PatchPair& p) {
    if (p.lr.rows < 1 || p.lr.cols < 1)
        throw std::invalid_argument("PatchPair: empty low-resolution field");
    if (p.hr.rows % p.lr.rows != 0 || p.hr.cols % p.lr.cols != 0)
        throw std::invalid_argument("PatchPair: hr dims must be an integer multiple of lr dims");
    const int fr = p.hr.rows / p.lr.rows;
    const int fc = p.hr.cols / p.lr.cols;
    if (fr != fc || fr < 2)
        throw std::invalid_argument("PatchPair: hr/lr factor must be a single integer >= 2");
    if (!p.terrain.same_shape(p.hr))
        throw std::invalid_argument("PatchPair: terrain shape must equal hr shape");
}

}  // namespace windsr
