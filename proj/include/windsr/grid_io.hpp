#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "windsr/denoiser.hpp"
#include "windsr/field.hpp"
#include "windsr/metrics.hpp"
#include "windsr/synth.hpp"

namespace windsr {

struct GridIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagicError : GridIoError {
    using GridIoError::GridIoError;
};
struct TruncatedFileError : GridIoError {
    using GridIoError::GridIoError;
};
struct VersionMismatchError : GridIoError {
    using GridIoError::GridIoError;
};

inline constexpr std::uint16_t kGridFormatVersion = 1;
inline constexpr std::uint16_t kCheckpointFormatVersion = 1;

/// Binary grid file: "WSRG" magic, u16 version, u32 rows, u32 cols,
/// f64 cell_size_km, then rows*cols little-endian f32 values row-major.
/// Writes are atomic (temp file + rename).
void write_grid(const Field2D& field, const std::filesystem::path& path);
Field2D read_grid(const std::filesystem::path& path);

/// Station CSV: header "id,row,col,height_m,speed_mps", one station per line.
void write_stations(const std::vector<StationObs>& stations,
                    const std::filesystem::path& path);
std::vector<StationObs> read_stations(const std::filesystem::path& path);

/// Model checkpoint: "WSRC" magic, u16 version, architecture header,
/// norm stats, then the little-endian f64 parameter payload.
void save_checkpoint(const DenoiserModel& model, const std::filesystem::path& path);
DenoiserModel load_checkpoint(const std::filesystem::path& path);

/// Per-iteration loss trace as "iteration,loss" rows.
void write_loss_csv(const std::vector<double>& losses, const std::filesystem::path& path);

/// EvalReport as CSV (header + one row) and as a flat key-value text record.
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
std::string report_to_kv_text(const EvalReport& report);

}  // namespace windsr
