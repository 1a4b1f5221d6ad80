#pragma once

#include "mpc3/exponential.hpp"
#include "mpc3/invsqrt.hpp"
#include "mpc3/rkn.hpp"

namespace mpc3 {

// Private inference on a recurrent kernel network: the model owner and the
// data owner split their tensors into additive shares; the proxies evaluate
// the forward pass entirely on the protocol suite. The forgetting factor
// lambda and the similarity sharpness alpha stay public hyperparameters
// (they only ever multiply shares, which is a local operation).

enum class GramMode : u32 {
    Outsourced = 0,      // model owner ships shares of K_j^{-1/2}
    ComputeInvsqrt = 1,  // proxies receive shares of K_j and run the protocol
};

struct SharedRknModel {
    size_t q = 0, k = 0, d = 0;
    double lambda = 0.5;
    double alpha_sim = 0.6;
    GramMode mode = GramMode::Outsourced;
    ArithVec anchors;     // k*q*d codes, split
    ArithVec weights;     // q
    ArithVec gram;        // k matrices q*q: K^{-1/2} shares or K shares per mode

    // Size-only view for the helper, which sees dimensions but no shares.
    static SharedRknModel public_stub(const SharedRknModel& other) {
        SharedRknModel s;
        s.q = other.q;
        s.k = other.k;
        s.d = other.d;
        s.lambda = other.lambda;
        s.alpha_sim = other.alpha_sim;
        s.mode = other.mode;
        s.anchors.resize(other.anchors.size());
        s.weights.resize(other.weights.size());
        s.gram.resize(other.gram.size());
        return s;
    }
};

struct SharedSequence {
    size_t length = 0, d = 0;
    ArithVec onehot; // length x d codes, split

    static SharedSequence public_stub(const SharedSequence& other) {
        SharedSequence s;
        s.length = other.length;
        s.d = other.d;
        s.onehot.resize(other.onehot.size());
        return s;
    }
};

namespace detail {

template <class Rng>
inline void split_reals_into(const std::vector<double>& values, const FixedPointConfig& cfg,
                             Rng& rng, ArithVec& out0, ArithVec& out1) {
    const Ring ring = cfg.ring();
    out0.resize(values.size());
    out1.resize(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        auto [a, b] = split(encode(values[i], cfg), ring, rng);
        out0[i].v = a;
        out1[i].v = b;
    }
}

} // namespace detail

// Splits every model tensor into two share sets. In ComputeInvsqrt mode the
// (ridged) prefix Gram matrices themselves are shared and the proxies run
// the inverse-square-root protocol at inference time.
template <class Rng>
inline std::pair<SharedRknModel, SharedRknModel> outsource_model(const PlainRknModel& m,
                                                                 const FixedPointConfig& cfg,
                                                                 Rng& rng,
                                                                 GramMode mode = GramMode::Outsourced) {
    validate_model(m);
    SharedRknModel s0, s1;
    s0.q = s1.q = m.q;
    s0.k = s1.k = m.k;
    s0.d = s1.d = m.d;
    s0.lambda = s1.lambda = m.lambda;
    s0.alpha_sim = s1.alpha_sim = m.alpha_sim;
    s0.mode = s1.mode = mode;

    detail::split_reals_into(m.anchors, cfg, rng, s0.anchors, s1.anchors);
    detail::split_reals_into(m.weights, cfg, rng, s0.weights, s1.weights);

    std::vector<double> grams;
    grams.reserve(m.k * m.q * m.q);
    for (size_t j = 1; j <= m.k; ++j) {
        std::vector<double> g;
        if (mode == GramMode::Outsourced)
            g = m.has_gram_invsqrt() ? m.gram_invsqrt[j - 1] : invsqrt_real(model_gram(m, j), m.q);
        else
            g = model_gram(m, j);
        grams.insert(grams.end(), g.begin(), g.end());
    }
    detail::split_reals_into(grams, cfg, rng, s0.gram, s1.gram);
    return {s0, s1};
}

template <class Rng>
inline std::pair<SharedSequence, SharedSequence> outsource_sequence(const EncodedSequence& seq,
                                                                    const FixedPointConfig& cfg,
                                                                    Rng& rng) {
    SharedSequence s0, s1;
    s0.length = s1.length = seq.length;
    s0.d = s1.d = seq.d;
    detail::split_reals_into(seq.onehot, cfg, rng, s0.onehot, s1.onehot);
    return {s0, s1};
}

struct InferenceResult {
    ArithShare prediction;                 // this proxy's share; zero on the helper
    std::vector<ArithVec> level_features;  // ComputeInvsqrt mode: K_j^{-1/2} c_j[s] shares
};

// Runs the forward pass on shares. Per character: one batched dot product
// for all k*q anchor similarities, public scaling to alpha (<x,z> - 1), one
// batched exponential, one batched product against the previous mappings,
// and a public lambda decay. The per-level recurrences only couple through
// the previous time step, so every level advances in the same batch.
inline InferenceResult private_inference(ProtocolContext& ctx, const SharedRknModel& model,
                                         const SharedSequence& seq) {
    auto scope = ctx.meter.scope("INFER");
    const FixedPointConfig& cfg = ctx.cfg;
    const Ring ring = cfg.ring();
    const size_t q = model.q, k = model.k, d = model.d, s = seq.length;
    if (s == 0) throw UsageError("private_inference: empty sequence");
    if (seq.d != d) throw UsageError("private_inference: encoding dimension mismatch");
    const bool proxy = ctx.is_proxy();
    const int party = proxy ? ctx.party_index() : -1;
    const u64 one_code = encode(1.0, cfg);
    const u64 lambda_code = encode_nearest(model.lambda, cfg);
    const u64 alpha_code = encode_nearest(model.alpha_sim, cfg);
    const double base_e = std::exp(1.0);

    // c[j], j = 0..k; c[0] is the public all-ones vector.
    std::vector<ArithVec> c(k + 1, ArithVec(q));
    if (party == 1)
        for (auto& sh : c[0]) sh.v = one_code;

    for (size_t t = 0; t < s; ++t) {
        // Similarities of character t against every anchor character.
        ArithVec xt(k * q * d), anchors_flat(k * q * d);
        if (proxy) {
            for (size_t blockidx = 0; blockidx < k * q; ++blockidx)
                for (size_t i = 0; i < d; ++i) {
                    xt[blockidx * d + i] = seq.onehot[t * d + i];
                    anchors_flat[blockidx * d + i] = model.anchors[blockidx * d + i];
                }
        }
        ArithVec u = dot_product_batch(ctx, xt, anchors_flat, d);

        // alpha (u - 1), locally.
        ArithVec v(k * q);
        if (proxy) {
            for (size_t e = 0; e < k * q; ++e) {
                ArithShare shifted = add_public(u[e], ring.neg(one_code), party, ring);
                v[e] = truncate_share(scale_by_public(shifted, alpha_code, ring), party, cfg);
            }
        }

        ArithVec b = exponential(ctx, v, base_e);
        if (!proxy) b.assign(k * q, ArithShare{});

        // prod[j-1] = c_{j-1}[t-1] (x) b_j[t], batched over all levels.
        ArithVec prev(k * q);
        if (proxy)
            for (size_t j = 0; j < k; ++j)
                for (size_t a = 0; a < q; ++a) prev[j * q + a] = c[j][a];
        ArithVec prod = mul(ctx, prev, b);

        if (proxy) {
            for (size_t j = k; j >= 1; --j)
                for (size_t a = 0; a < q; ++a) {
                    ArithShare decay = truncate_share(
                        scale_by_public(c[j][a], lambda_code, ring), party, cfg);
                    c[j][a] = add_local(decay, prod[(j - 1) * q + a], ring);
                }
        }
    }

    InferenceResult out;
    ArithVec mapped;
    if (model.mode == GramMode::ComputeInvsqrt) {
        // The paper's worst-case mode: run the inverse square root for the
        // Gram matrix of every prefix level and map each level's state.
        out.level_features.resize(k);
        for (size_t j = 1; j <= k; ++j) {
            ArithVec g(model.gram.begin() + static_cast<long>((j - 1) * q * q),
                       model.gram.begin() + static_cast<long>(j * q * q));
            ArithVec r = invsqrt(ctx, g, q);
            if (!proxy) r.assign(q * q, ArithShare{});
            ArithVec feat = matvec(ctx, r, c[j], q, q);
            if (!proxy) feat.assign(q, ArithShare{});
            out.level_features[j - 1] = feat;
        }
        mapped = out.level_features[k - 1];
    } else {
        ArithVec r(model.gram.begin() + static_cast<long>((k - 1) * q * q),
                   model.gram.begin() + static_cast<long>(k * q * q));
        mapped = matvec(ctx, r, c[k], q, q);
        if (!proxy) mapped.assign(q, ArithShare{});
    }

    ArithVec pred = dot_product(ctx, model.weights, mapped);
    if (proxy) out.prediction = pred[0];
    return out;
}

inline double reveal_prediction(ArithShare s0, ArithShare s1, const FixedPointConfig& cfg) {
    return decode(reconstruct(s0, s1, cfg.ring()), cfg);
}

// --- Share files ----------------------------------------------------------------
//
// Binary: magic, kind, role, n, dec, dims, hyperparameters, tensors.

inline constexpr u32 kShareFileMagic = 0x33485353; // "SSH3"

enum class ShareFileKind : u32 { Model = 1, Sequence = 2 };

inline u64 double_bits(double v) {
    u64 b;
    std::memcpy(&b, &v, 8);
    return b;
}
inline double bits_double(u64 b) {
    double v;
    std::memcpy(&v, &b, 8);
    return v;
}

inline Bytes serialize_model_share(const SharedRknModel& m, int role, const FixedPointConfig& cfg) {
    Bytes out;
    put_u32(out, kShareFileMagic);
    put_u32(out, static_cast<u32>(ShareFileKind::Model));
    put_u32(out, static_cast<u32>(role));
    put_u32(out, cfg.n);
    put_u32(out, cfg.dec);
    put_u64(out, m.q);
    put_u64(out, m.k);
    put_u64(out, m.d);
    put_u64(out, double_bits(m.lambda));
    put_u64(out, double_bits(m.alpha_sim));
    put_u32(out, static_cast<u32>(m.mode));
    for (const auto& sh : m.anchors) put_u64(out, sh.v);
    for (const auto& sh : m.weights) put_u64(out, sh.v);
    for (const auto& sh : m.gram) put_u64(out, sh.v);
    return out;
}

inline SharedRknModel deserialize_model_share(const Bytes& b, int expected_role,
                                              const FixedPointConfig& cfg) {
    ByteReader r(b);
    if (r.get_u32() != kShareFileMagic) throw UsageError("share file: bad magic");
    if (r.get_u32() != static_cast<u32>(ShareFileKind::Model))
        throw UsageError("share file: not a model share");
    if (r.get_u32() != static_cast<u32>(expected_role))
        throw UsageError("share file: wrong party role");
    if (r.get_u32() != cfg.n || r.get_u32() != cfg.dec)
        throw UsageError("share file: number format mismatch");
    SharedRknModel m;
    m.q = r.get_u64();
    m.k = r.get_u64();
    m.d = r.get_u64();
    m.lambda = bits_double(r.get_u64());
    m.alpha_sim = bits_double(r.get_u64());
    m.mode = static_cast<GramMode>(r.get_u32());
    m.anchors.resize(m.k * m.q * m.d);
    for (auto& sh : m.anchors) sh.v = r.get_u64();
    m.weights.resize(m.q);
    for (auto& sh : m.weights) sh.v = r.get_u64();
    m.gram.resize(m.k * m.q * m.q);
    for (auto& sh : m.gram) sh.v = r.get_u64();
    if (!r.done()) throw UsageError("share file: trailing bytes");
    return m;
}

inline Bytes serialize_sequence_share(const SharedSequence& s, int role,
                                      const FixedPointConfig& cfg) {
    Bytes out;
    put_u32(out, kShareFileMagic);
    put_u32(out, static_cast<u32>(ShareFileKind::Sequence));
    put_u32(out, static_cast<u32>(role));
    put_u32(out, cfg.n);
    put_u32(out, cfg.dec);
    put_u64(out, s.length);
    put_u64(out, s.d);
    for (const auto& sh : s.onehot) put_u64(out, sh.v);
    return out;
}

inline SharedSequence deserialize_sequence_share(const Bytes& b, int expected_role,
                                                 const FixedPointConfig& cfg) {
    ByteReader r(b);
    if (r.get_u32() != kShareFileMagic) throw UsageError("share file: bad magic");
    if (r.get_u32() != static_cast<u32>(ShareFileKind::Sequence))
        throw UsageError("share file: not a sequence share");
    if (r.get_u32() != static_cast<u32>(expected_role))
        throw UsageError("share file: wrong party role");
    if (r.get_u32() != cfg.n || r.get_u32() != cfg.dec)
        throw UsageError("share file: number format mismatch");
    SharedSequence s;
    s.length = r.get_u64();
    s.d = r.get_u64();
    s.onehot.resize(s.length * s.d);
    for (auto& sh : s.onehot) sh.v = r.get_u64();
    if (!r.done()) throw UsageError("share file: trailing bytes");
    return s;
}

} // namespace mpc3
