#pragma once

#include <vector>

#include "windsr/field.hpp"

namespace windsr {

/// Block-mean coarsening: each output cell is the arithmetic mean of its
/// factor x factor source block. Preserves the global mean exactly.
Field2D coarsen(const Field2D& field, int factor);

/// Bilinear upsampling, cell-center aligned, clamped at the borders.
Field2D upsample_bilinear(const Field2D& field, int factor);

/// Bicubic (Keys, a = -0.5) upsampling, cell-center aligned, clamped borders.
Field2D upsample_bicubic(const Field2D& field, int factor);

/// Bilinear resampling onto a destination grid with a co-registered
/// lower-left origin. The destination extent must not exceed the source
/// extent; samples are clamped at the borders.
Field2D regrid(const Field2D& src, int dst_rows, int dst_cols, double dst_cell_km);

/// All full patches in row-major scan order.
std::vector<Field2D> extract_patches(const Field2D& field, int patch, int stride);

/// Bilinear point sample at fractional cell-index coordinates, clamped.
double sample_bilinear(const Field2D& field, double r, double c);

/// Bicubic point sample at fractional cell-index coordinates, clamped.
double sample_bicubic(const Field2D& field, double r, double c);

}  // namespace windsr
