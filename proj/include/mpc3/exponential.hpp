#pragma once

#include "mpc3/protocols.hpp"

namespace mpc3 {

// Exact exponential of a public base raised to a secret power, built from
// the square-and-multiply identity b^a = prod_j b^{a_j 2^{j-dec}} over the
// bits a_j of the fixed-point power.

// Largest |x| for which every required contribution of base^x is
// representable: beyond it base^{-|x|} quantizes to zero.
inline double usable_power_range(double base, const FixedPointConfig& cfg) {
    if (!(base > 0) || base == 1.0) throw UsageError("usable_power_range: base must be positive and != 1");
    double lb = std::fabs(std::log2(base));
    double pos_limit = static_cast<double>(cfg.n - cfg.dec - 1) / lb;
    double neg_limit = static_cast<double>(cfg.dec) / lb;
    return std::min(pos_limit, neg_limit);
}

// Per-bit contribution tables, ordered so that slot k holds the value for
// bit n-1-k (the slot whose left-shifted copy puts that bit on top).
// Out-of-range entries saturate: a positive contribution too large for the
// format stores the maximum code, a negative-power contribution below the
// resolution stores zero. Those slots correspond to bits that are never set
// for an in-range power, and the select-or-one step keeps them inert.
struct ContributionTables {
    std::vector<u64> positive; // codes of base^{2^{m-dec}}
    std::vector<u64> negative; // codes of base^{-2^{m-dec}}
    u64 one;                   // encode(1)
};

inline ContributionTables build_contribution_tables(double base, const FixedPointConfig& cfg) {
    if (!(base > 0)) throw UsageError("exponential: base must be positive");
    ContributionTables t;
    t.positive.resize(cfg.n);
    t.negative.resize(cfg.n);
    t.one = encode(1.0, cfg);
    const u64 max_code = (1ULL << (cfg.n - 1)) - 1; // largest positive code
    const double lb = std::log2(base);
    for (unsigned k = 0; k < cfg.n; ++k) {
        unsigned m = cfg.n - 1 - k; // bit index, 0 = least significant
        double e2 = std::ldexp(1.0, static_cast<int>(m) - static_cast<int>(cfg.dec));
        double log2_pos = e2 * lb;
        if (log2_pos >= static_cast<double>(cfg.n - cfg.dec - 1))
            t.positive[k] = max_code;
        else if (log2_pos <= -static_cast<double>(cfg.dec))
            t.positive[k] = 0;
        else
            t.positive[k] = encode_nearest(std::exp2(log2_pos), cfg);
        double log2_neg = -log2_pos;
        if (log2_neg >= static_cast<double>(cfg.n - cfg.dec - 1))
            t.negative[k] = max_code;
        else if (log2_neg <= -static_cast<double>(cfg.dec))
            t.negative[k] = 0;
        else
            t.negative[k] = encode_nearest(std::exp2(log2_neg), cfg);
    }
    return t;
}

namespace detail {

inline size_t next_pow2(size_t v) {
    size_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

} // namespace detail

// Reconstructs to base^{decode(x)} for powers inside usable_power_range.
// Out-of-range secret powers produce undefined values (the private path
// cannot inspect its input). Flow: sign via MSB, select the power or its
// negation together with the matching table, extract every bit with one
// batched MSB over left-shifted copies, select contribution-or-one per bit,
// multiply in a balanced binary tree. 24 rounds at n=64.
inline ArithVec exponential(ProtocolContext& ctx, const ArithVec& x, double base) {
    auto scope = ctx.meter.scope("EXP");
    const size_t m = x.size();
    const Ring ring = ctx.cfg.ring();
    const unsigned n = ctx.cfg.n;
    const int party = ctx.is_proxy() ? ctx.party_index() : -1;

    ContributionTables tables = build_contribution_tables(base, ctx.cfg);
    auto share_of_public = [&](u64 code) -> u64 { return party == 1 ? code : 0; };

    // Sign of the power.
    ArithVec sign = most_significant_bit(ctx, x);

    // One MUX selects, per element, (x, positive table) vs (-x, negative table).
    const size_t block = 1 + n;
    ArithVec sel_x(m * block), sel_y(m * block), sel_b(m * block);
    if (ctx.is_proxy()) {
        for (size_t e = 0; e < m; ++e) {
            sel_x[e * block].v = x[e].v;
            sel_y[e * block].v = ring.neg(x[e].v);
            for (unsigned k = 0; k < n; ++k) {
                sel_x[e * block + 1 + k].v = share_of_public(tables.positive[k]);
                sel_y[e * block + 1 + k].v = share_of_public(tables.negative[k]);
            }
            for (size_t j = 0; j < block; ++j) sel_b[e * block + j] = sign[e];
        }
    }
    ArithVec selected = multiplexer(ctx, sel_x, sel_y, sel_b);

    // Left-shifted copies expose every bit of the |power| as a top bit.
    ArithVec shifted(m * n);
    if (ctx.is_proxy()) {
        for (size_t e = 0; e < m; ++e) {
            u64 xhat = selected[e * block].v;
            for (unsigned k = 0; k < n; ++k) shifted[e * n + k].v = ring.reduce(xhat << k);
        }
    }
    ArithVec bits = most_significant_bit(ctx, shifted);

    // Contribution where the bit is set, one otherwise.
    ArithVec ones(m * n), contrib(m * n);
    if (ctx.is_proxy()) {
        for (size_t e = 0; e < m; ++e)
            for (unsigned k = 0; k < n; ++k) {
                ones[e * n + k].v = share_of_public(tables.one);
                contrib[e * n + k].v = selected[e * block + 1 + k].v;
            }
    }
    ArithVec factors = multiplexer(ctx, ones, contrib, bits);

    // Balanced product tree; odd widths pad with exact ones.
    size_t width = detail::next_pow2(n);
    ArithVec cur(m * width);
    if (ctx.is_proxy()) {
        for (size_t e = 0; e < m; ++e) {
            for (unsigned k = 0; k < n; ++k) cur[e * width + k] = factors[e * n + k];
            for (size_t k = n; k < width; ++k) cur[e * width + k].v = share_of_public(tables.one);
        }
    }
    while (width > 1) {
        size_t half = width / 2;
        ArithVec lo(m * half), hi(m * half);
        if (ctx.is_proxy()) {
            for (size_t e = 0; e < m; ++e)
                for (size_t k = 0; k < half; ++k) {
                    lo[e * half + k] = cur[e * width + k];
                    hi[e * half + k] = cur[e * width + half + k];
                }
        }
        cur = mul(ctx, lo, hi);
        if (!ctx.is_proxy()) cur.assign(m * half, ArithShare{});
        width = half;
    }
    return ctx.is_proxy() ? cur : ArithVec{};
}

// Fixed-point reference for the private path: the same per-bit contributions
// and the same product-tree pairing, evaluated with perfect shares (exact
// floor at every truncation). This isolates protocol noise from the
// quantization inherent to the number format.
inline double plaintext_exp_oracle(double x, double base, const FixedPointConfig& cfg) {
    if (std::fabs(x) > usable_power_range(base, cfg))
        throw RangeError("power outside the usable range for this base");
    ContributionTables tables = build_contribution_tables(base, cfg);
    const Ring ring = cfg.ring();
    const unsigned n = cfg.n;

    u64 mag = x >= 0 ? encode(x, cfg) : ring.neg(encode(x, cfg));
    const std::vector<u64>& table = x >= 0 ? tables.positive : tables.negative;

    size_t width = detail::next_pow2(n);
    std::vector<u64> cur(width, tables.one);
    for (unsigned k = 0; k < n; ++k) {
        unsigned bit = n - 1 - k;
        cur[k] = ((mag >> bit) & 1) ? table[k] : tables.one;
    }
    while (width > 1) {
        size_t half = width / 2;
        for (size_t k = 0; k < half; ++k) {
            // Ring product then shift: exactly what perfect shares would see.
            cur[k] = ring.mul(cur[k], cur[half + k]) >> cfg.dec;
        }
        cur.resize(half);
        width = half;
    }
    return decode(cur[0], cfg);
}

// Error allowance between the private path and the fixed-point oracle: one
// ulp of carry noise per tree level, amplified by at most the magnitude of
// the result.
inline double exp_tree_error_bound(double oracle_result, const FixedPointConfig& cfg) {
    double levels = std::ceil(std::log2(static_cast<double>(cfg.n)));
    return levels * 2.0 * cfg.resolution() * std::max(1.0, std::fabs(oracle_result));
}

} // namespace mpc3
