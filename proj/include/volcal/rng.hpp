#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "volcal/errors.hpp"

namespace volcal::rng {

/// SplitMix64 step. Used for start-point jitter and stream key mixing.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace detail {

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace detail

/// Philox4x32-10 counter-based generator. A block is a pure function of
/// (key, counter), so draw i of stream p is the same no matter which thread
/// asks for it — the reproducibility contract of the Monte-Carlo oracles.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            detail::mulhilo32(kMul0, ctr[0], hi0, lo0);
            detail::mulhilo32(kMul1, ctr[2], hi1, lo1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// Inverse standard normal CDF, Wichura's AS 241 (PPND16), |err| < 1e-15
/// over the open unit interval.
inline double inverse_norm_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidInput("inverse_norm_cdf: p must lie in (0,1)");
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r +
                    4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r +
                  1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r +
                3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r +
                    2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r +
                  6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r +
                1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r +
                     1.27045825245236838258e+0) * r +
                    3.64784832476320460504e+0) * r +
                   5.76949722146069140550e+0) * r +
                  4.63033784615654529590e+0) * r +
                 1.42343711074968357734e+0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r +
                     1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r +
                   1.67638483018380384940e+0) * r +
                  2.05319162663775882187e+0) * r +
                 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r +
                     2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r +
                   1.78482653991729133580e+0) * r +
                  5.46378491116411436990e+0) * r +
                 6.65790464350110377720e+0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r +
                     7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r +
                   1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r +
                 1.0);
    }
    return (q < 0.0) ? -value : value;
}

/// One stream of standard normal draws, keyed by (seed, stream index).
/// Stream s always yields the same sequence regardless of how many other
/// streams exist or which thread consumes it.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        ++block_;
        const auto out = Philox4x32::block(ctr, key_);
        const std::uint64_t a =
            static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
        const std::uint64_t b =
            static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
        spare_ = inverse_norm_cdf(to_unit(b));
        have_spare_ = true;
        return inverse_norm_cdf(to_unit(a));
    }

private:
    // 53-bit mantissa, offset keeps the value strictly inside (0,1).
    static double to_unit(std::uint64_t x) {
        return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Uniform draw in [lo, hi) from a splitmix-evolved state.
inline double uniform(std::uint64_t& state, double lo, double hi) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

} // namespace volcal::rng
