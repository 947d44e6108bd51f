#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "windsr/field.hpp"

namespace windsr {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x00000100000001B3ULL;
    }
    return h;
}

}  // namespace detail

/// Seeded random stream with fully specified draw semantics, so that every
/// generator in the project is bit-reproducible. Named substreams derived
/// from the same seed are independent of each other and of draw order.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed)
        : seed_(seed), engine_(detail::splitmix64(seed)) {}

    /// Independent substream keyed by (original seed, tag).
    [[nodiscard]] RngStream derive(std::string_view tag) const {
        return RngStream(detail::splitmix64(seed_ ^ detail::fnv1a64(tag)));
    }

    [[nodiscard]] RngStream derive(std::uint64_t n) const {
        return RngStream(detail::splitmix64(seed_ ^ detail::splitmix64(n ^ 0xA24BAED4963EE407ULL)));
    }

    [[nodiscard]] std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Lemire rejection, unbiased.
    std::uint64_t uniform_int(std::uint64_t n) {
        std::uint64_t x = engine_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                x = engine_();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (spare value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    void fill_normal(Field2D& f) {
        for (double& v : f.values) v = normal();
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline Field2D normal_field(int rows, int cols, double cell_km, RngStream& rng) {
    Field2D f(rows, cols, cell_km);
    rng.fill_normal(f);
    return f;
}

}  // namespace windsr
