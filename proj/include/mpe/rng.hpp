#pragma once

#include <cmath>
#include <cstdint>

namespace mpe {

/// Counter-based Gaussian draws: every sample is a pure function of its key,
/// so any window of any noise path can be replayed from (seed, indices) in
/// O(1) memory. Two-sided time indices are supported directly.
namespace rng {

inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t key_hash(std::uint64_t seed, std::uint64_t comp, std::uint64_t mode,
                              std::int64_t n, std::uint64_t salt) {
    std::uint64_t h = mix(seed ^ 0x243f6a8885a308d3ULL);
    h = mix(h ^ (comp + 0x452821e638d01377ULL));
    h = mix(h ^ (mode * 0x9e3779b97f4a7c15ULL));
    h = mix(h ^ static_cast<std::uint64_t>(n));
    h = mix(h ^ (salt + 0x13198a2e03707344ULL));
    return h;
}

inline double u01(std::uint64_t h) {
    return (double(h >> 11) + 0.5) * 0x1.0p-53;  // strictly inside (0,1)
}

/// Standard normal sample for the given key (Box-Muller, cosine branch).
inline double normal(std::uint64_t seed, std::uint64_t comp, std::uint64_t mode,
                     std::int64_t n, std::uint64_t salt) {
    double u1 = u01(key_hash(seed, comp, mode, n, 2 * salt));
    double u2 = u01(key_hash(seed, comp, mode, n, 2 * salt + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline constexpr std::uint64_t kSaltIncrement = 1;
inline constexpr std::uint64_t kSaltInit = 2;
inline constexpr std::uint64_t kSaltField = 3;

}  // namespace rng

/// Two-sided Wiener increment stream, keyed by (seed, component, mode, step).
///
/// Increments live on a fine lattice of width dt_fine; a path with stride s
/// exposes steps of dt = s * dt_fine whose increments are sums of fine ones,
/// so runs at different strides see consistent restrictions of one Brownian
/// path. The shift theta_s is an offset in the key space and composes
/// exactly.
struct NoisePath {
    std::uint64_t seed = 0;
    double dt_fine = 1e-3;
    int stride = 1;
    std::int64_t offset = 0;  // in fine-lattice units

    double dt() const { return dt_fine * stride; }

    /// N(0, dt()) increment for step n of the given component/mode.
    double increment(int comp, int mode, std::int64_t n) const {
        double sq = std::sqrt(dt_fine);
        double s = 0.0;
        std::int64_t base = n * stride + offset;
        for (int r = 0; r < stride; ++r)
            s += rng::normal(seed, comp, mode, base + r, rng::kSaltIncrement) * sq;
        return s;
    }

    /// The same increment normalized to N(0,1).
    double normal01(int comp, int mode, std::int64_t n) const {
        return increment(comp, mode, n) / std::sqrt(dt());
    }

    /// Stationary-init draw, keyed by the absolute fine-lattice index so that
    /// shifted paths replay the same initial coefficients.
    double init_normal(int comp, int mode, std::int64_t t0) const {
        return rng::normal(seed, comp, mode, t0 * stride + offset, rng::kSaltInit);
    }

    /// Auxiliary N(0,1) stream for building initial states and test fields.
    double field_normal(int tag, int idx) const {
        return rng::normal(seed, std::uint64_t(tag), std::uint64_t(idx), 0, rng::kSaltField);
    }

    NoisePath shifted(std::int64_t s) const {
        NoisePath p = *this;
        p.offset += s * stride;
        return p;
    }

    NoisePath with_stride(int s) const {
        NoisePath p = *this;
        p.stride = s;
        return p;
    }
};

}  // namespace mpe
