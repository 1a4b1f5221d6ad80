#pragma once

#include <cmath>

#include "mpc3/ring.hpp"

namespace mpc3 {

// Fixed-point number format over Z_{2^n}: the low `dec` bits hold the
// fraction, the most significant bit is 1 exactly for negative values.
struct FixedPointConfig {
    unsigned n = 64;
    unsigned dec = 20;

    FixedPointConfig() = default;
    FixedPointConfig(unsigned n_bits, unsigned dec_bits) : n(n_bits), dec(dec_bits) {
        if (dec == 0 || dec >= n || n > 64)
            throw ConfigError("fixed point config requires 0 < dec < n <= 64");
    }

    Ring ring() const { return Ring(n); }
    Ring half_ring() const { return Ring(n - 1); }
    u64 half_size() const { return 1ULL << (n - 1); } // 2^{n-1}
    double scale() const { return std::ldexp(1.0, static_cast<int>(dec)); }
    // Largest representable magnitude, 2^{n-dec-1}.
    double max_real() const { return std::ldexp(1.0, static_cast<int>(n - dec - 1)); }
    double resolution() const { return std::ldexp(1.0, -static_cast<int>(dec)); }
};

// x >= 0 -> floor(x * 2^dec);  x < 0 -> 2^n - floor(|x| * 2^dec).
inline u64 encode(double x, const FixedPointConfig& cfg) {
    double limit = cfg.max_real();
    if (!(std::fabs(x) < limit))
        throw RangeError("encode: |" + std::to_string(x) + "| >= 2^" +
                         std::to_string(cfg.n - cfg.dec - 1));
    Ring ring = cfg.ring();
    u64 mag = static_cast<u64>(std::floor(std::fabs(x) * cfg.scale()));
    return x >= 0 ? ring.reduce(mag) : ring.neg(mag);
}

// Round-to-nearest variant for public protocol constants (contribution
// tables, public hyperparameters, masking scalars). Shared tensors use the
// floor-based encode above; public constants round to keep repeated products
// with them unbiased.
inline u64 encode_nearest(double x, const FixedPointConfig& cfg) {
    double limit = cfg.max_real();
    if (!(std::fabs(x) < limit))
        throw RangeError("encode_nearest: value out of range");
    Ring ring = cfg.ring();
    u64 mag = static_cast<u64>(std::llround(std::fabs(x) * cfg.scale()));
    return x >= 0 ? ring.reduce(mag) : ring.neg(mag);
}

// Two's-complement reading: v >= 2^{n-1} decodes to (v - 2^n) / 2^dec.
inline double decode(u64 v, const FixedPointConfig& cfg) {
    v &= cfg.ring().mask;
    u64 sign_bit = 1ULL << (cfg.n - 1);
    if (v & sign_bit) {
        u64 mag = cfg.ring().neg(v);
        return -static_cast<double>(mag) / cfg.scale();
    }
    return static_cast<double>(v) / cfg.scale();
}

inline bool code_is_negative(u64 v, const FixedPointConfig& cfg) {
    return ((v >> (cfg.n - 1)) & 1) != 0;
}

// Post-multiplication truncation restoring the single-`dec` scale,
// applied locally to each share of the product:
//   party 0 shifts its share right by dec,
//   party 1 negates, shifts right by dec, negates again.
// Reconstruction equals floor(product / 2^dec) + {0, 1} except with
// probability ~2^{bitlen(product)+1-n} when the share split wraps.
inline ArithShare truncate_share(ArithShare z, int party, const FixedPointConfig& cfg) {
    Ring ring = cfg.ring();
    if (party == 0) return {ring.reduce(z.v >> cfg.dec)};
    return {ring.neg(ring.neg(z.v) >> cfg.dec)};
}

inline ArithVec truncate_share(const ArithVec& z, int party, const FixedPointConfig& cfg) {
    ArithVec out(z.size());
    for (size_t i = 0; i < z.size(); ++i) out[i] = truncate_share(z[i], party, cfg);
    return out;
}

} // namespace mpc3
