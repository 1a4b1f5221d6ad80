#pragma once

#include "mpc3/eigen.hpp"
#include "mpc3/protocols.hpp"

namespace mpc3 {

// Inverse square root of a secret shared Gram matrix. The proxies mask their
// shares with a common orthogonal matrix and common scalars; the helper
// eigendecomposes the masked matrix in the real domain and re-masks the
// eigenvalues before anything returns. Masks must stay inside a constraint
// set so no fixed-point stage overflows; that range restriction is what
// limits this protocol to high-probability rather than perfect privacy.

struct MaskParams {
    std::vector<double> m_orth; // q x q orthogonal, row-major; common to proxies
    double alp = 0;             // common positive scalar
    double s = 0;               // common positive scalar, > 2q
    std::vector<double> delta;  // helper's positive mask vector
    double alpha_mask = 0;      // helper's positive offset
};

// The draw intervals. Public protocol parameters: both proxies and the
// helper size their draws from these, so feasibility is checkable by anyone.
struct MaskDrawRanges {
    double alp_lo = 1.0, alp_hi = 4.0;
    double s_lo = 0, s_hi = 0;         // (2q, 4q]
    double delta_lo = 1.0, delta_hi = 8.0;
    double alpha_lo = 0, alpha_hi = 0; // (2 min(delta_hi, alp_hi q + s_hi), ..]
    double lambda_max = 0;             // <= q by the trace bound on unit-diagonal Grams

    static MaskDrawRanges for_dims(size_t q, const FixedPointConfig& cfg) {
        MaskDrawRanges r;
        r.lambda_max = static_cast<double>(q);
        r.s_lo = 2.0 * static_cast<double>(q);
        r.s_hi = 4.0 * static_cast<double>(q);
        r.alpha_lo = 2.0 * std::min(r.delta_hi, r.alp_hi * static_cast<double>(q) + r.s_hi);
        r.alpha_hi = 4.0 * r.alpha_lo;
        double p_double = std::ldexp(1.0, static_cast<int>(cfg.n) - 2 * static_cast<int>(cfg.dec) - 1);
        double p_single = std::ldexp(1.0, static_cast<int>(cfg.n) - static_cast<int>(cfg.dec) - 1);
        // The doubled-fraction headroom must cover the largest masked entry.
        if (r.alp_hi + r.s_hi >= p_double || r.alpha_hi >= p_single ||
            r.delta_hi * (r.alp_hi * static_cast<double>(q) + r.s_hi) >= p_double)
            throw ConfigError("mask draw ranges infeasible for this number format");
        return r;
    }
};

// One named inequality from the constraint set.
struct MaskViolation {
    std::string constraint;
    std::string detail;
};

struct MaskValidation {
    bool ok = true;
    std::vector<MaskViolation> violations;
};

// Upper bounds of the value sets the masks are drawn from.
struct MaskBounds {
    double lambda_max;
    double alp;
    double s;
    double m_max;
    double delta_max;
    double alpha;
};

// Checks every inequality of the overflow/connection constraint set for the
// given bounds at dimension q. Failures name the violated constraint.
inline MaskValidation validate_mask_ranges(const MaskBounds& b, size_t q,
                                           const FixedPointConfig& cfg) {
    MaskValidation out;
    const double qd = static_cast<double>(q);
    const double p_double = std::ldexp(1.0, static_cast<int>(cfg.n) - 2 * static_cast<int>(cfg.dec) - 1);
    const double p_single = std::ldexp(1.0, static_cast<int>(cfg.n) - static_cast<int>(cfg.dec) - 1);
    auto fail = [&](const std::string& name, const std::string& detail) {
        out.ok = false;
        out.violations.push_back({name, detail});
    };

    double m2 = b.m_max * b.m_max;
    if (!(m2 < p_double / (b.alp + b.s)) || !(m2 < p_single / (qd * qd * (b.alp + b.s))))
        fail("const_orth", "m_max^2 exceeds the masked-product headroom");
    if (!(b.delta_max < p_double / (b.alp * b.lambda_max + b.s)) ||
        !(b.delta_max < (p_single - b.alpha) / (b.alp * b.lambda_max + b.s)))
        fail("const_delta", "delta_max exceeds the eigenvalue re-masking headroom");
    if (!(b.alp < p_double / m2 - b.s) || !(b.alp < p_single / (qd * qd * m2) - b.s) ||
        !(b.alp < (p_double - b.s * b.delta_max) / (b.delta_max * qd)) ||
        !(b.alp < (p_single - b.alpha - b.s * b.delta_max) / (b.delta_max * qd)))
        fail("const_alp", "alp exceeds its headroom");
    if (!(b.s > 2.0 * qd)) fail("const_min_s", "s must exceed twice the dimension");
    if (!(b.s < p_double / m2 - b.alp) || !(b.s < p_single / (qd * qd * m2) - b.alp) ||
        !(b.s < p_double / b.delta_max - b.alp * qd) ||
        !(b.s < (p_single - b.alpha) / b.delta_max - b.alp * qd))
        fail("const_max_s", "s exceeds its headroom");
    if (!(b.alpha > 2.0 * std::min(b.delta_max, b.alp * b.lambda_max + b.s)))
        fail("const_min_alpha", "alpha too small to hide the eigenvalue masking gaps");
    if (!(b.alpha < p_single - p_double)) fail("const_max_alpha", "alpha exceeds its headroom");
    return out;
}

inline MaskBounds bounds_of(const MaskParams& p, size_t q) {
    MaskBounds b{};
    b.lambda_max = static_cast<double>(q);
    b.alp = p.alp;
    b.s = p.s;
    b.m_max = 0;
    for (double v : p.m_orth) b.m_max = std::max(b.m_max, std::fabs(v));
    b.delta_max = 0;
    for (double v : p.delta) b.delta_max = std::max(b.delta_max, std::fabs(v));
    b.alpha = p.alpha_mask;
    return b;
}

namespace detail {

// Orthogonal factor of a random Gaussian matrix via modified Gram-Schmidt.
template <class Rng>
inline std::vector<double> random_orthogonal(size_t q, Rng&& normal) {
    std::vector<double> m(q * q);
    for (auto& v : m) v = normal();
    for (size_t j = 0; j < q; ++j) {
        for (size_t k = 0; k < j; ++k) {
            double dot = 0;
            for (size_t i = 0; i < q; ++i) dot += m[i * q + j] * m[i * q + k];
            for (size_t i = 0; i < q; ++i) m[i * q + j] -= dot * m[i * q + k];
        }
        double norm = 0;
        for (size_t i = 0; i < q; ++i) norm += m[i * q + j] * m[i * q + j];
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw MpcError("degenerate Gaussian draw");
        for (size_t i = 0; i < q; ++i) m[i * q + j] /= norm;
    }
    return m;
}

} // namespace detail

// Draws a full parameter set inside the constraint ranges.
template <class UniformDraw, class NormalDraw>
inline MaskParams generate_mask_params(size_t q, const FixedPointConfig& cfg, UniformDraw uniform,
                                       NormalDraw normal) {
    auto ranges = MaskDrawRanges::for_dims(q, cfg);
    MaskParams p;
    p.m_orth = detail::random_orthogonal(q, normal);
    p.alp = uniform(ranges.alp_lo, ranges.alp_hi);
    p.s = uniform(std::nextafter(ranges.s_lo, ranges.s_hi), ranges.s_hi);
    p.delta.resize(q);
    for (auto& d : p.delta) d = uniform(ranges.delta_lo, ranges.delta_hi);
    p.alpha_mask = uniform(std::nextafter(ranges.alpha_lo, ranges.alpha_hi), ranges.alpha_hi);

    auto check = validate_mask_ranges(bounds_of(p, q), q, cfg);
    if (!check.ok) throw ConfigError("generated mask parameters violate " +
                                     check.violations.front().constraint);
    return p;
}

template <class Rng>
inline MaskParams generate_mask_params(size_t q, const FixedPointConfig& cfg, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return generate_mask_params(
        q, cfg, [&](double lo, double hi) { return lo + unit(rng) * (hi - lo); },
        [&]() { return normal(rng); });
}

namespace detail {

// Public real matrix times share matrix (and the mirrored order), with one
// truncation per entry.
inline ArithVec public_matmul(const std::vector<double>& pub, const ArithVec& shares, size_t q,
                              bool pub_on_left, int party, const FixedPointConfig& cfg) {
    const Ring ring = cfg.ring();
    std::vector<u64> pcodes(q * q);
    for (size_t i = 0; i < q * q; ++i) pcodes[i] = encode_nearest(pub[i], cfg);
    ArithVec out(q * q);
    for (size_t i = 0; i < q; ++i)
        for (size_t j = 0; j < q; ++j) {
            u64 acc = 0;
            for (size_t k = 0; k < q; ++k) {
                u64 lhs = pub_on_left ? pcodes[i * q + k] : shares[i * q + k].v;
                u64 rhs = pub_on_left ? shares[k * q + j].v : pcodes[k * q + j];
                acc = ring.add(acc, ring.mul(lhs, rhs));
            }
            out[i * q + j] = truncate_share(ArithShare{acc}, party, cfg);
        }
    return out;
}

inline std::vector<double> transpose(const std::vector<double>& a, size_t q) {
    std::vector<double> t(q * q);
    for (size_t i = 0; i < q; ++i)
        for (size_t j = 0; j < q; ++j) t[j * q + i] = a[i * q + j];
    return t;
}

} // namespace detail

// Smallest unmasked eigenvalue the proxies will accept. Below it 1/sqrt
// amplifies fixed-point noise past usefulness, so the protocol aborts.
// With delta drawn from [1, 8], an abort implies the true eigenvalue is
// below the threshold; eigenvalues in [threshold/8, threshold) may slip
// through, which only costs accuracy headroom, never correctness.
inline constexpr double kEigenvalueAbortThreshold = 0.05;

// Inverse square root of a shared symmetric positive-definite Gram matrix
// with unit-ish diagonal (eigenvalues bounded by q). Returns shares of R
// with R R G = I up to fixed-point noise. 9 rounds: mask delivery to the
// helper, the helper's return, the partial unmasker, and three
// triple-backed multiplications.
inline ArithVec invsqrt(ProtocolContext& ctx, const ArithVec& g_shares, size_t q,
                        const MaskParams* fixed_params = nullptr) {
    auto scope = ctx.meter.scope("INVSQRT");
    const Ring ring = ctx.cfg.ring();
    const FixedPointConfig& cfg = ctx.cfg;
    auto ranges = MaskDrawRanges::for_dims(q, cfg);

    if (ctx.role == PartyRole::Helper) {
        // Reconstruct the masked matrix in the real domain.
        Bytes b0 = ctx.recv_from(PartyRole::Proxy0);
        Bytes b1 = ctx.recv_from(PartyRole::Proxy1);
        ByteReader r0(b0), r1(b1);
        std::vector<double> gp(q * q);
        for (auto& v : gp) v = decode(ring.add(r0.get_u64(), r1.get_u64()), cfg);
        // Symmetrize away fixed-point noise before the decomposition.
        for (size_t i = 0; i < q; ++i)
            for (size_t j = i + 1; j < q; ++j) {
                double m = 0.5 * (gp[i * q + j] + gp[j * q + i]);
                gp[i * q + j] = gp[j * q + i] = m;
            }
        auto eig = jacobi_eigendecompose(gp, q);
        for (double lam : eig.values)
            if (lam <= 0)
                throw ProtocolAbort("invsqrt: masked Gram matrix is not positive definite");

        std::vector<double> delta(q);
        double alpha;
        if (fixed_params) {
            delta = fixed_params->delta;
            alpha = fixed_params->alpha_mask;
        } else {
            auto uni = [&](double lo, double hi) {
                return lo + (static_cast<double>(ctx.rng() >> 11) * 0x1.0p-53) * (hi - lo);
            };
            for (auto& d : delta) d = uni(ranges.delta_lo, ranges.delta_hi);
            alpha = uni(std::nextafter(ranges.alpha_lo, ranges.alpha_hi), ranges.alpha_hi);
        }

        // Re-mask the eigenvalues and split the eigenvectors.
        Bytes to_p0, to_p1;
        for (size_t j = 0; j < q; ++j)
            put_u64(to_p0, encode_nearest(eig.values[j] * delta[j] + alpha, cfg));
        for (size_t j = 0; j < q; ++j) put_u64(to_p1, encode_nearest(delta[j], cfg));
        put_u64(to_p1, encode_nearest(alpha, cfg));
        for (double v : eig.vectors) {
            auto [s0, s1] = split(encode_nearest(v, cfg), ring, ctx.rng);
            put_u64(to_p0, s0);
            put_u64(to_p1, s1);
        }
        ctx.send_to(PartyRole::Proxy0, to_p0);
        ctx.send_to(PartyRole::Proxy1, to_p1);

        mul(ctx, ArithVec(q), ArithVec(q));
        mul(ctx, ArithVec(q * q), ArithVec(q * q));
        matmul(ctx, ArithVec(q * q), ArithVec(q * q), q, q, q);
        return {};
    }

    if (g_shares.size() != q * q) throw UsageError("invsqrt: dimension mismatch");
    const int party = ctx.party_index();

    // Common masks. Drawn from the coin so both proxies agree.
    std::vector<double> m_orth;
    double alp, s;
    if (fixed_params) {
        m_orth = fixed_params->m_orth;
        alp = fixed_params->alp;
        s = fixed_params->s;
    } else {
        m_orth = detail::random_orthogonal(q, [&] {
            // Box-Muller over coin draws keeps both proxies in lockstep.
            double u1 = ctx.coin.uniform_real(1e-12, 1.0);
            double u2 = ctx.coin.uniform_real(0.0, 1.0);
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        });
        alp = ctx.coin.uniform_real(ranges.alp_lo, ranges.alp_hi);
        s = ctx.coin.uniform_real(std::nextafter(ranges.s_lo, ranges.s_hi), ranges.s_hi);
    }

    // G'_i = M (alp G_i + i s I) M^T, all in the ring.
    ArithVec masked(q * q);
    const u64 alp_code = encode_nearest(alp, cfg);
    for (size_t idx = 0; idx < q * q; ++idx)
        masked[idx] =
            truncate_share(scale_by_public(g_shares[idx], alp_code, ring), party, cfg);
    if (party == 1) {
        const u64 s_code = encode_nearest(s, cfg);
        for (size_t j = 0; j < q; ++j)
            masked[j * q + j].v = ring.add(masked[j * q + j].v, s_code);
    }
    masked = detail::public_matmul(m_orth, masked, q, true, party, cfg);
    masked = detail::public_matmul(detail::transpose(m_orth, q), masked, q, false, party, cfg);

    ctx.send_to(PartyRole::Helper, pack_shares(masked));
    ctx.meter.round();

    Bytes reply = ctx.recv_from(PartyRole::Helper);
    ctx.meter.round();
    ByteReader rd(reply);

    ArithVec lam_x(q), lam_y(q); // inputs of the eigenvalue unmask product
    ArithVec evec(q * q);
    if (party == 0) {
        std::vector<double> lam2(q);
        for (auto& v : lam2) v = decode(rd.get_u64(), cfg);
        for (auto& e : evec) e.v = rd.get_u64();

        // Partial unmasker from the twin.
        Bytes ub = ctx.recv_from(PartyRole::Proxy1);
        ctx.meter.round();
        ByteReader ur(ub);
        for (size_t j = 0; j < q; ++j) {
            double u = decode(ur.get_u64(), cfg);
            double lam3 = (lam2[j] - u) / alp; // = delta_j * lambda_j
            if (lam3 <= 0)
                throw ProtocolAbort("invsqrt: unmasked eigenvalue is not positive");
            if (lam3 < kEigenvalueAbortThreshold * ranges.delta_lo)
                throw ProtocolAbort(
                    "invsqrt: Gram matrix is ill-conditioned (eigenvalue below " +
                    std::to_string(kEigenvalueAbortThreshold) + ")");
            lam_x[j].v = encode_nearest(1.0 / std::sqrt(lam3), cfg);
        }
    } else {
        std::vector<double> delta(q);
        for (auto& v : delta) v = decode(rd.get_u64(), cfg);
        double alpha = decode(rd.get_u64(), cfg);
        for (auto& e : evec) e.v = rd.get_u64();

        Bytes ub;
        for (size_t j = 0; j < q; ++j) put_u64(ub, encode_nearest(s * delta[j] + alpha, cfg));
        ctx.send_to(PartyRole::Proxy0, ub);
        ctx.meter.round();
        for (size_t j = 0; j < q; ++j) lam_y[j].v = encode_nearest(std::sqrt(delta[j]), cfg);
    }

    // lambda^{-1/2} = (delta lambda)^{-1/2} * delta^{1/2}, via one product of
    // the proxies' locally held factors.
    ArithVec lam_invsqrt = mul(ctx, lam_x, lam_y);

    // Unmask the eigenvectors: E = M^T E'.
    ArithVec e_unmasked =
        detail::public_matmul(detail::transpose(m_orth, q), evec, q, true, party, cfg);

    // R = E diag(lambda^{-1/2}) E^T.
    ArithVec lam_bcast(q * q);
    for (size_t i = 0; i < q; ++i)
        for (size_t j = 0; j < q; ++j) lam_bcast[i * q + j] = lam_invsqrt[j];
    ArithVec ed = mul(ctx, e_unmasked, lam_bcast);
    ArithVec et(q * q);
    for (size_t i = 0; i < q; ++i)
        for (size_t j = 0; j < q; ++j) et[j * q + i] = e_unmasked[i * q + j];
    return matmul(ctx, ed, et, q, q, q);
}

} // namespace mpc3
