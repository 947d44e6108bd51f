#include "windsr/grid_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace windsr {

namespace fs = std::filesystem;

namespace {

constexpr char kGridMagic[4] = {'W', 'S', 'R', 'G'};
constexpr char kCkptMagic[4] = {'W', 'S', 'R', 'C'};

// All on-disk integers and floats are little-endian. The helpers below write
// byte-by-byte so the format does not depend on host endianness.

void put_bytes(std::string& buf, const void* p, std::size_t n) {
    buf.append(static_cast<const char*>(p), n);
}

void put_u16(std::string& buf, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
    put_bytes(buf, b, 2);
}

void put_u32(std::string& buf, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    put_bytes(buf, b, 4);
}

void put_u8(std::string& buf, std::uint8_t v) { buf.push_back(static_cast<char>(v)); }

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    put_bytes(buf, b, 8);
}

void put_f32(std::string& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(buf, bits);
}

class Reader {
public:
    Reader(const fs::path& path, const char* what) : what_(what) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw GridIoError(std::string(what) + ": cannot open " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        data_ = std::move(ss).str();
    }

    void need(std::size_t n) const {
        if (pos_ + n > data_.size())
            throw TruncatedFileError(std::string(what_) + ": truncated file");
    }

    void get_bytes(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }

    std::uint8_t get_u8() {
        std::uint8_t v;
        get_bytes(&v, 1);
        return v;
    }

    std::uint16_t get_u16() {
        unsigned char b[2];
        get_bytes(b, 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }

    std::uint32_t get_u32() {
        unsigned char b[4];
        get_bytes(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    }

    double get_f64() {
        unsigned char b[8];
        get_bytes(b, 8);
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    float get_f32() {
        const std::uint32_t bits = get_u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    void expect_magic(const char magic[4]) {
        char got[4];
        get_bytes(got, 4);
        if (std::memcmp(got, magic, 4) != 0)
            throw BadMagicError(std::string(what_) + ": bad magic");
    }

    void expect_version(std::uint16_t expected) {
        const std::uint16_t got = get_u16();
        if (got != expected)
            throw VersionMismatchError(std::string(what_) + ": unsupported format version " +
                                       std::to_string(got));
    }

    [[nodiscard]] bool exhausted() const { return pos_ == data_.size(); }

private:
    std::string data_;
    std::size_t pos_ = 0;
    const char* what_;
};

void atomic_write(const fs::path& path, const std::string& payload) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw GridIoError("cannot open " + tmp.string() + " for writing");
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (!out) throw GridIoError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace

void write_grid(const Field2D& field, const fs::path& path) {
    field.validate();
    std::string buf;
    buf.reserve(22 + field.size() * 4);
    put_bytes(buf, kGridMagic, 4);
    put_u16(buf, kGridFormatVersion);
    put_u32(buf, static_cast<std::uint32_t>(field.rows));
    put_u32(buf, static_cast<std::uint32_t>(field.cols));
    put_f64(buf, field.cell_size_km);
    for (double v : field.values) put_f32(buf, static_cast<float>(v));
    atomic_write(path, buf);
}

Field2D read_grid(const fs::path& path) {
    Reader rd(path, "grid");
    rd.expect_magic(kGridMagic);
    rd.expect_version(kGridFormatVersion);
    const std::uint32_t rows = rd.get_u32();
    const std::uint32_t cols = rd.get_u32();
    const double cell = rd.get_f64();
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20))
        throw GridIoError("grid: implausible dimensions");
    Field2D f(static_cast<int>(rows), static_cast<int>(cols), cell);
    for (double& v : f.values) v = static_cast<double>(rd.get_f32());
    f.validate();
    return f;
}

void write_stations(const std::vector<StationObs>& stations, const fs::path& path) {
    std::string buf = "id,row,col,height_m,speed_mps\n";
    char line[160];
    for (const auto& s : stations) {
        if (s.id.find(',') != std::string::npos || s.id.find('\n') != std::string::npos)
            throw GridIoError("stations: id must not contain commas or newlines");
        std::snprintf(line, sizeof(line), "%s,%d,%d,%.17g,%.17g\n", s.id.c_str(), s.row, s.col,
                      s.height_m, s.speed_mps);
        buf += line;
    }
    atomic_write(path, buf);
}

std::vector<StationObs> read_stations(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw GridIoError("stations: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw GridIoError("stations: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id,row,col,height_m,speed_mps")
        throw GridIoError("stations: unexpected header '" + line + "'");

    std::vector<StationObs> out;
    std::set<std::pair<int, int>> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                parts.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (parts.size() != 5)
            throw GridIoError("stations: line " + std::to_string(lineno) +
                              " has wrong field count");
        StationObs s;
        try {
            s.id = parts[0];
            s.row = std::stoi(parts[1]);
            s.col = std::stoi(parts[2]);
            s.height_m = std::stod(parts[3]);
            s.speed_mps = std::stod(parts[4]);
        } catch (const std::exception&) {
            throw GridIoError("stations: line " + std::to_string(lineno) + " is not parseable");
        }
        if (s.height_m <= 0.0)
            throw GridIoError("stations: line " + std::to_string(lineno) +
                              ": height must be positive");
        if (s.speed_mps < 0.0)
            throw GridIoError("stations: line " + std::to_string(lineno) +
                              ": speed must be >= 0");
        if (!seen.insert({s.row, s.col}).second)
            throw GridIoError("stations: duplicate cell (" + std::to_string(s.row) + "," +
                              std::to_string(s.col) + ")");
        out.push_back(std::move(s));
    }
    return out;
}

void save_checkpoint(const DenoiserModel& model, const fs::path& path) {
    std::string buf;
    put_bytes(buf, kCkptMagic, 4);
    put_u16(buf, kCheckpointFormatVersion);
    put_u8(buf, model.use_terrain ? 1 : 0);
    put_u8(buf, model.padding == PaddingMode::Wrap ? 1 : 0);
    put_u32(buf, static_cast<std::uint32_t>(model.T));
    put_u32(buf, static_cast<std::uint32_t>(model.hidden));
    put_u32(buf, static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& l : model.layers) {
        put_u32(buf, static_cast<std::uint32_t>(l.in_ch));
        put_u32(buf, static_cast<std::uint32_t>(l.out_ch));
        put_u32(buf, static_cast<std::uint32_t>(l.ksize));
    }
    put_f64(buf, model.norm.wind_mean);
    put_f64(buf, model.norm.wind_std);
    put_f64(buf, model.norm.terrain_mean);
    put_f64(buf, model.norm.terrain_std);
    for (double v : model.time_emb) put_f64(buf, v);
    for (const auto& l : model.layers) {
        for (double v : l.w) put_f64(buf, v);
        for (double v : l.b) put_f64(buf, v);
    }
    atomic_write(path, buf);
}

DenoiserModel load_checkpoint(const fs::path& path) {
    Reader rd(path, "checkpoint");
    rd.expect_magic(kCkptMagic);
    rd.expect_version(kCheckpointFormatVersion);

    DenoiserModel m;
    m.use_terrain = rd.get_u8() != 0;
    m.padding = rd.get_u8() != 0 ? PaddingMode::Wrap : PaddingMode::Zero;
    m.T = static_cast<int>(rd.get_u32());
    m.hidden = static_cast<int>(rd.get_u32());
    const std::uint32_t n_layers = rd.get_u32();
    if (m.T < 1 || m.hidden < 1 || n_layers == 0 || n_layers > 64)
        throw GridIoError("checkpoint: implausible architecture header");
    m.layers.resize(n_layers);
    for (auto& l : m.layers) {
        l.in_ch = static_cast<int>(rd.get_u32());
        l.out_ch = static_cast<int>(rd.get_u32());
        l.ksize = static_cast<int>(rd.get_u32());
        if (l.in_ch < 1 || l.out_ch < 1 || l.ksize < 1 || l.ksize > 15)
            throw GridIoError("checkpoint: implausible layer shape");
        l.w.resize(static_cast<std::size_t>(l.in_ch) * l.out_ch * l.ksize * l.ksize);
        l.b.resize(static_cast<std::size_t>(l.out_ch));
    }
    m.norm.wind_mean = rd.get_f64();
    m.norm.wind_std = rd.get_f64();
    m.norm.terrain_mean = rd.get_f64();
    m.norm.terrain_std = rd.get_f64();
    m.time_emb.resize(static_cast<std::size_t>(m.T) * m.hidden);
    for (double& v : m.time_emb) v = rd.get_f64();
    for (auto& l : m.layers) {
        for (double& v : l.w) v = rd.get_f64();
        for (double& v : l.b) v = rd.get_f64();
    }
    if (!rd.exhausted()) throw GridIoError("checkpoint: trailing bytes");
    return m;
}

void write_loss_csv(const std::vector<double>& losses, const fs::path& path) {
    std::string buf = "iteration,loss\n";
    char line[64];
    for (std::size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(line, sizeof(line), "%zu,%.17g\n", i, losses[i]);
        buf += line;
    }
    atomic_write(path, buf);
}

namespace {

std::string fmt_metric(double v) {
    char b[40];
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::snprintf(b, sizeof(b), "%.17g", v);
    return b;
}

}  // namespace

void write_report_csv(const EvalReport& r, const fs::path& path) {
    std::string buf = "mae,rmse,pearson_r,psnr_db,ssim,n_pixels,data_range\n";
    buf += fmt_metric(r.mae) + "," + fmt_metric(r.rmse) + "," +
           (r.pearson_defined ? fmt_metric(r.pearson_r) : "nan") + "," +
           fmt_metric(r.psnr_db) + "," + fmt_metric(r.ssim) + "," +
           std::to_string(r.n_pixels) + "," + fmt_metric(r.data_range) + "\n";
    atomic_write(path, buf);
}

std::string report_to_kv_text(const EvalReport& r) {
    std::string out;
    out += "mae=" + fmt_metric(r.mae) + "\n";
    out += "rmse=" + fmt_metric(r.rmse) + "\n";
    out += "pearson_r=" + (r.pearson_defined ? fmt_metric(r.pearson_r) : std::string("nan")) + "\n";
    out += "psnr_db=" + fmt_metric(r.psnr_db) + "\n";
    out += "ssim=" + fmt_metric(r.ssim) + "\n";
    out += "n_pixels=" + std::to_string(r.n_pixels) + "\n";
    out += "data_range=" + fmt_metric(r.data_range) + "\n";
    return out;
}

}  // namespace windsr
