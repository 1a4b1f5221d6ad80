#pragma once

#include "mpc3/context.hpp"

namespace mpc3 {

// The base protocol suite. Every operation is vectorized: all element
// messages of one step travel in a single frame, so vector length never
// changes the round count. Proxies tick the meter once per dependency
// barrier; the helper's sends are part of the same barriers.
//
// Reference round counts: MUL 2, DP 2, MOC 4, MSB 4, CMP 4, MUX 2.

namespace detail {

// Delivers one batch of Beaver triples for the current invocation. Online
// mode counts the delivery as one round on the proxy side.
inline std::vector<BeaverTriple> obtain_triples(ProtocolContext& ctx, size_t count) {
    if (ctx.role == PartyRole::Helper) {
        if (ctx.online_dealing) {
            std::vector<BeaverTriple> t0, t1;
            generate_triples(count, ctx.cfg.ring(), ctx.rng, t0, t1);
            Bytes b0, b1;
            for (size_t i = 0; i < count; ++i) {
                put_u64(b0, t0[i].a), put_u64(b0, t0[i].b), put_u64(b0, t0[i].c);
                put_u64(b1, t1[i].a), put_u64(b1, t1[i].b), put_u64(b1, t1[i].c);
            }
            ctx.send_to(PartyRole::Proxy0, b0);
            ctx.send_to(PartyRole::Proxy1, b1);
        }
        return {};
    }
    std::vector<BeaverTriple> out(count);
    if (ctx.online_dealing) {
        Bytes b = ctx.recv_from(PartyRole::Helper);
        ByteReader r(b);
        for (auto& t : out) {
            t.a = r.get_u64();
            t.b = r.get_u64();
            t.c = r.get_u64();
        }
        ctx.meter.round();
    } else {
        for (auto& t : out) t = ctx.triples.take();
    }
    return out;
}

// Beaver product core: returns shares of x*y at doubled fraction scale
// (no truncation). Two barriers: triple delivery, mask exchange.
inline ArithVec beaver_products(ProtocolContext& ctx, const ArithVec& x, const ArithVec& y) {
    if (x.size() != y.size()) throw UsageError("mul: length mismatch");
    const size_t m = x.size();
    auto triples = obtain_triples(ctx, m);
    if (ctx.role == PartyRole::Helper) return {};

    const Ring ring = ctx.cfg.ring();
    const int i = ctx.party_index();

    // Open e = x - a and f = y - b.
    Bytes mine;
    mine.reserve(m * 16);
    for (size_t k = 0; k < m; ++k) {
        put_u64(mine, ring.sub(x[k].v, triples[k].a));
        put_u64(mine, ring.sub(y[k].v, triples[k].b));
    }
    Bytes theirs = ctx.exchange_with_twin(mine);
    ByteReader rd(theirs);

    ArithVec z(m);
    for (size_t k = 0; k < m; ++k) {
        u64 e = ring.sub(x[k].v, triples[k].a);
        u64 f = ring.sub(y[k].v, triples[k].b);
        e = ring.add(e, rd.get_u64());
        f = ring.add(f, rd.get_u64());
        // z_i = i*e*f + f*a_i + e*b_i + c_i
        u64 zi = ring.add(ring.mul(f, triples[k].a), ring.mul(e, triples[k].b));
        zi = ring.add(zi, triples[k].c);
        if (i == 1) zi = ring.add(zi, ring.mul(e, f));
        z[k].v = zi;
    }
    return z;
}

} // namespace detail

// Element-wise product of two share vectors, truncated back to scale.
inline ArithVec mul(ProtocolContext& ctx, const ArithVec& x, const ArithVec& y) {
    auto scope = ctx.meter.scope("MUL");
    ArithVec z = detail::beaver_products(ctx, x, y);
    if (ctx.role == PartyRole::Helper) return {};
    return truncate_share(z, ctx.party_index(), ctx.cfg);
}

// Segmented dot products: x and y hold `segments` back-to-back blocks of
// `seg_len` elements each; returns one share per block. The block products
// are summed at doubled scale and truncated once.
inline ArithVec dot_product_batch(ProtocolContext& ctx, const ArithVec& x, const ArithVec& y,
                                  size_t seg_len) {
    auto scope = ctx.meter.scope("DP");
    if (seg_len == 0 || x.size() % seg_len != 0) throw UsageError("dot_product: bad segmenting");
    ArithVec z = detail::beaver_products(ctx, x, y);
    if (ctx.role == PartyRole::Helper) return {};
    const Ring ring = ctx.cfg.ring();
    ArithVec out(x.size() / seg_len);
    for (size_t s = 0; s < out.size(); ++s) {
        u64 acc = 0;
        for (size_t k = 0; k < seg_len; ++k) acc = ring.add(acc, z[s * seg_len + k].v);
        out[s] = truncate_share(ArithShare{acc}, ctx.party_index(), ctx.cfg);
    }
    return out;
}

inline ArithVec dot_product(ProtocolContext& ctx, const ArithVec& x, const ArithVec& y) {
    if (x.size() != y.size() || x.empty()) throw UsageError("dot_product: length mismatch");
    return dot_product_batch(ctx, x, y, x.size());
}

// --- Private compare ---------------------------------------------------------

namespace detail {

// Per-element inputs of the bitwise comparison, proxy side.
struct PcCommons {
    u8 beta = 0;                 // masks the predicate toward the helper
    std::vector<u8> scale;       // s_j in [1,67)
    std::vector<u32> perm;       // common permutation of the bit positions
    std::vector<u8> dummies;     // u_j in [1,67), used when y+1 wraps
};

inline PcCommons draw_pc_commons(CommonCoin& coin, unsigned nbits, bool beta_from_coin,
                                 u8 fixed_beta = 0) {
    PcCommons c;
    c.beta = beta_from_coin ? coin.bit() : fixed_beta;
    c.scale.resize(nbits);
    for (auto& s : c.scale) s = coin.nonzero_field_element();
    c.perm = coin.permutation(nbits);
    c.dummies.resize(nbits);
    for (auto& u : c.dummies) u = coin.nonzero_field_element();
    return c;
}

// Emits the masked field elements {b_j} for one element: the helper learns
// whether some reconstructed position is zero, which encodes (r > y) xor beta.
// Positions are scaled by common s_j and shuffled by the common permutation.
inline void pc_emit(int party, const FieldBitShares& r_bits, u64 y, const PcCommons& pcc,
                    unsigned nbits, Bytes& out) {
    const int i = party;
    const u64 top = (nbits == 64) ? ~0ULL : ((1ULL << nbits) - 1);
    std::vector<u8> c(nbits);

    if (pcc.beta == 1 && y == top) {
        // y + 1 wraps: r > y is impossible, so emit dummies that reconstruct
        // to exactly one zero (at bit position 0 pre-shuffle) and non-zeros
        // elsewhere, keeping the helper's view shaped like the generic case.
        for (unsigned j = 0; j < nbits; ++j) {
            u8 u = pcc.dummies[j];
            if (j == 0) {
                c[j] = (i == 0) ? u : f67_sub(0, u);
            } else {
                c[j] = (i == 0) ? f67_add(u, 1) : f67_sub(0, u);
            }
        }
    } else {
        const u64 v = (pcc.beta == 0) ? y : y + 1; // t = y + 1 when beta = 1
        // Walk from the most significant bit, accumulating w_k = r[k] xor v[k].
        u32 wsum = 0;
        for (int j = static_cast<int>(nbits) - 1; j >= 0; --j) {
            u32 rj = r_bits.bits[static_cast<unsigned>(j)];
            u32 vj = static_cast<u32>((v >> j) & 1);
            u32 cj;
            if (pcc.beta == 0) {
                // c_j = y[j] - r[j] + 1 + sum_{k>j} w_k
                cj = (static_cast<u32>(i) * vj + kBitField - rj + static_cast<u32>(i) + wsum) %
                     kBitField;
            } else {
                // c_j = r[j] - t[j] + 1 + sum_{k>j} w_k
                cj = (rj + kBitField - (static_cast<u32>(i) * vj) % kBitField +
                      static_cast<u32>(i) + wsum) %
                     kBitField;
            }
            c[static_cast<unsigned>(j)] = static_cast<u8>(cj);
            // w_j = r[j] + v[j] - 2 v[j] r[j]
            u32 wj = (rj + static_cast<u32>(i) * vj + 2 * kBitField - 2 * vj * rj) % kBitField;
            wsum = (wsum + wj) % kBitField;
        }
    }

    for (unsigned j = 0; j < nbits; ++j) out.push_back(f67_mul(pcc.scale[j], c[pcc.perm[j]]));
}

// Helper side: scan one element's reconstructed positions for a zero.
inline u8 pc_scan(ByteReader& r0, ByteReader& r1, unsigned nbits) {
    u8 found = 0;
    for (unsigned j = 0; j < nbits; ++j) {
        if (f67_add(r0.get_u8(), r1.get_u8()) == 0) found = 1;
    }
    return found;
}

} // namespace detail

// Compares a bit-shared secret r against public y: the boolean shares
// returned reconstruct to (r > y) xor beta, where beta is the common bit the
// proxies supply. The helper sees only shuffled scaled field elements.
inline std::vector<BoolShare> private_compare(ProtocolContext& ctx,
                                              const std::vector<FieldBitShares>& r_bits,
                                              const std::vector<u64>& y,
                                              const std::vector<u8>& beta) {
    auto scope = ctx.meter.scope("PC");
    const size_t m = y.size();

    if (ctx.role == PartyRole::Helper) {
        Bytes b0 = ctx.recv_from(PartyRole::Proxy0);
        Bytes b1 = ctx.recv_from(PartyRole::Proxy1);
        ByteReader r0(b0), r1(b1);
        u32 nbits = r0.get_u32();
        (void)r1.get_u32();
        size_t count = (b0.size() - 4) / nbits;
        Bytes s0, s1;
        for (size_t e = 0; e < count; ++e) {
            u8 gprime = detail::pc_scan(r0, r1, nbits);
            u8 sh0 = static_cast<u8>(ctx.rng() & 1);
            s0.push_back(sh0);
            s1.push_back(gprime ^ sh0);
        }
        ctx.send_to(PartyRole::Proxy0, s0);
        ctx.send_to(PartyRole::Proxy1, s1);
        return {};
    }

    if (r_bits.size() != m || beta.size() != m) throw UsageError("private_compare: length mismatch");
    const unsigned nbits = static_cast<unsigned>(r_bits.empty() ? 0 : r_bits[0].bits.size());
    Bytes out;
    put_u32(out, nbits);
    for (size_t e = 0; e < m; ++e) {
        auto pcc = detail::draw_pc_commons(ctx.coin, nbits, false, beta[e]);
        detail::pc_emit(ctx.party_index(), r_bits[e], y[e], pcc, nbits, out);
    }
    ctx.send_to(PartyRole::Helper, out);
    ctx.meter.round();

    Bytes back = ctx.recv_from(PartyRole::Helper);
    ctx.meter.round();
    std::vector<BoolShare> res(m);
    for (size_t e = 0; e < m; ++e) res[e].bit = back[e];
    return res;
}

// --- Modulus conversion ------------------------------------------------------

namespace detail {

inline std::vector<MocRandomness> obtain_mask_material(ProtocolContext& ctx, size_t count,
                                                       bool share_wrap,
                                                       std::vector<DealerWrapRecord>* kept) {
    const Ring half = ctx.cfg.half_ring();
    const unsigned nbits = ctx.cfg.n - 1;
    if (ctx.role == PartyRole::Helper) {
        if (ctx.online_dealing) {
            std::vector<MocRandomness> m0, m1;
            std::vector<DealerWrapRecord> w;
            generate_moc_randomness(count, half, nbits, share_wrap, ctx.rng, m0, m1, w);
            if (kept) *kept = std::move(w);
            auto pack = [&](const std::vector<MocRandomness>& v) {
                Bytes b;
                for (const auto& item : v) {
                    put_u64(b, item.r_half.v);
                    for (u8 bit : item.r_bits.bits) b.push_back(bit);
                    if (share_wrap) b.push_back(item.w_bool.bit);
                }
                return b;
            };
            ctx.send_to(PartyRole::Proxy0, pack(m0));
            ctx.send_to(PartyRole::Proxy1, pack(m1));
        } else {
            if (kept) {
                kept->resize(count);
                for (auto& rec : *kept) rec = ctx.wrap_records.take();
            }
        }
        return {};
    }
    std::vector<MocRandomness> out(count);
    if (ctx.online_dealing) {
        Bytes b = ctx.recv_from(PartyRole::Helper);
        ByteReader r(b);
        for (auto& item : out) {
            item.r_half.v = r.get_u64();
            item.r_bits.bits.resize(nbits);
            for (auto& bit : item.r_bits.bits) bit = r.get_u8();
            if (share_wrap) item.w_bool.bit = r.get_u8();
        }
        ctx.meter.round();
    } else {
        auto& stream = share_wrap ? ctx.conversion_randomness : ctx.sign_randomness;
        for (auto& item : out) item = stream.take();
    }
    return out;
}

} // namespace detail

// Converts shares over Z_{2^{n-1}} into fresh shares of the same value over
// Z_{2^n}. Flow: mask with dealer r, open x+r in the half ring, lift it, fix
// the potential wrap of x+r via the bitwise compare, subtract the lifted r.
inline ArithVec modulus_conversion(ProtocolContext& ctx, const HalfVec& x) {
    auto scope = ctx.meter.scope("MOC");
    const size_t m = x.size();

    auto material = detail::obtain_mask_material(ctx, m, /*share_wrap=*/true, nullptr);

    if (ctx.role == PartyRole::Helper) {
        private_compare(ctx, {}, std::vector<u64>(m, 0), {});
        return {};
    }

    const Ring ring = ctx.cfg.ring();
    const Ring half = ctx.cfg.half_ring();
    const u64 half_size = ctx.cfg.half_size();
    const int i = ctx.party_index();

    std::vector<u8> uprime(m);
    for (auto& b : uprime) b = ctx.coin.bit();

    // Open y = x + r in the half ring.
    std::vector<u64> y_mine(m);
    Bytes frame;
    for (size_t e = 0; e < m; ++e) {
        y_mine[e] = half.add(x[e].v, material[e].r_half.v);
        put_u64(frame, y_mine[e]);
    }
    Bytes twin_frame = ctx.exchange_with_twin(frame);
    ByteReader rd(twin_frame);
    std::vector<u64> y(m), y0(m), y1(m);
    for (size_t e = 0; e < m; ++e) {
        u64 y_theirs = rd.get_u64();
        y0[e] = (i == 0) ? y_mine[e] : y_theirs;
        y1[e] = (i == 0) ? y_theirs : y_mine[e];
        y[e] = half.add(y0[e], y1[e]);
    }

    std::vector<FieldBitShares> bits(m);
    for (size_t e = 0; e < m; ++e) bits[e] = material[e].r_bits;
    auto pc_out = private_compare(ctx, bits, y, uprime);

    ArithVec out(m);
    for (size_t e = 0; e < m; ++e) {
        u8 u = pc_out[e].bit;
        if (i == 0) u ^= uprime[e]; // now u0 xor u1 = (r > y), the wrap of x+r
        u8 c = material[e].w_bool.bit ^ u;
        u64 ylift = y_mine[e];
        if (i == 0) ylift = ring.add(ylift, is_wrap(y0[e], y1[e], half) * half_size);
        u64 xi = ring.sub(ylift, ring.add(material[e].r_half.v, c * half_size));
        out[e].v = xi;
    }
    return out;
}

// --- Most significant bit ----------------------------------------------------

// Returns integer-scale {0,1} shares of the top bit of each secret. The ring
// conversion and bitwise compare are fused into the message flow: dealer
// material, one proxy exchange, one combined frame to the helper, one reply.
inline ArithVec most_significant_bit(ProtocolContext& ctx, const ArithVec& x) {
    auto scope = ctx.meter.scope("MSB");
    const size_t m = x.size();
    const Ring ring = ctx.cfg.ring();
    const Ring half = ctx.cfg.half_ring();
    const u64 half_size = ctx.cfg.half_size();
    const unsigned nbits = ctx.cfg.n - 1;

    std::vector<DealerWrapRecord> wrecs;
    auto material = detail::obtain_mask_material(ctx, m, /*share_wrap=*/false, &wrecs);

    if (ctx.role == PartyRole::Helper) {
        Bytes b0 = ctx.recv_from(PartyRole::Proxy0);
        Bytes b1 = ctx.recv_from(PartyRole::Proxy1);
        ByteReader r0(b0), r1(b1);
        Bytes reply0, reply1;
        for (size_t e = 0; e < m; ++e) {
            u8 gprime = detail::pc_scan(r0, r1, nbits);
            u64 a0 = ring.add(r0.get_u64(), r1.get_u64());
            u64 a1 = ring.add(r0.get_u64(), r1.get_u64());
            u64 corr = (gprime ^ wrecs[e].w) ? half_size : 0;
            u64 bit0 = ring.sub(a0, corr) >> (ctx.cfg.n - 1);
            u64 bit1 = ring.sub(a1, corr) >> (ctx.cfg.n - 1);
            auto [p0a, p1a] = split(bit0, ring, ctx.rng);
            auto [p0b, p1b] = split(bit1, ring, ctx.rng);
            put_u64(reply0, p0a), put_u64(reply0, p0b);
            put_u64(reply1, p1a), put_u64(reply1, p1b);
        }
        ctx.send_to(PartyRole::Proxy0, reply0);
        ctx.send_to(PartyRole::Proxy1, reply1);
        return {};
    }

    const int i = ctx.party_index();

    struct ElemCommons {
        u8 f, g;
        detail::PcCommons pcc;
    };
    std::vector<ElemCommons> commons(m);
    for (auto& c : commons) {
        c.f = ctx.coin.bit();
        c.g = ctx.coin.bit();
        c.pcc = detail::draw_pc_commons(ctx.coin, nbits, false, 0);
        c.pcc.beta = c.g;
    }

    // Open y = (x mod 2^{n-1}) + r in the half ring.
    std::vector<u64> y_mine(m);
    Bytes frame;
    for (size_t e = 0; e < m; ++e) {
        u64 d = x[e].v & half.mask;
        y_mine[e] = half.add(d, material[e].r_half.v);
        put_u64(frame, y_mine[e]);
    }
    Bytes twin_frame = ctx.exchange_with_twin(frame);
    ByteReader rd(twin_frame);

    Bytes to_helper;
    std::vector<u64> y(m);
    for (size_t e = 0; e < m; ++e) {
        u64 y_theirs = rd.get_u64();
        u64 ya = (i == 0) ? y_mine[e] : y_theirs;
        u64 yb = (i == 0) ? y_theirs : y_mine[e];
        y[e] = half.add(ya, yb);
        u64 ylift = ring.add(y_mine[e], (i == 1) ? is_wrap(ya, yb, half) * half_size : 0);

        // a[0] reconstructs to f*2^{n-1} - z, a[1] to (1-f)*2^{n-1} - z,
        // each offset by the wrap corrections the helper removes.
        u64 base = ring.sub(ylift, ring.add(x[e].v, material[e].r_half.v));
        u64 a0 = ring.add(static_cast<u64>(i) * commons[e].f * half_size, base);
        u64 a1 = ring.add(static_cast<u64>(i) * (1 - commons[e].f) * half_size, base);

        detail::pc_emit(i, material[e].r_bits, y[e], commons[e].pcc, nbits, to_helper);
        put_u64(to_helper, a0);
        put_u64(to_helper, a1);
    }
    ctx.send_to(PartyRole::Helper, to_helper);
    ctx.meter.round();

    Bytes reply = ctx.recv_from(PartyRole::Helper);
    ctx.meter.round();
    ByteReader rr(reply);
    ArithVec out(m);
    for (size_t e = 0; e < m; ++e) {
        u64 za0 = rr.get_u64();
        u64 za1 = rr.get_u64();
        out[e].v = (commons[e].f ^ commons[e].g) ? za1 : za0;
    }
    return out;
}

// 0 if x >= y, 1 otherwise, at integer scale: the sign bit of x - y.
inline ArithVec compare(ProtocolContext& ctx, const ArithVec& x, const ArithVec& y) {
    auto scope = ctx.meter.scope("CMP");
    if (ctx.role == PartyRole::Helper) return most_significant_bit(ctx, ArithVec(x.size()));
    return most_significant_bit(ctx, sub_local(x, y, ctx.cfg.ring()));
}

// --- Multiplexer -------------------------------------------------------------

// Selects x where b = 0 and y where b = 1: z = x - b(x - y). b is carried at
// integer scale so no truncation is needed. The cross-share products are
// outsourced to the helper as a randomized encoding: the helper multiplies
// masked operands and returns fresh shares of the correction.
inline ArithVec multiplexer(ProtocolContext& ctx, const ArithVec& x, const ArithVec& y,
                            const ArithVec& b) {
    auto scope = ctx.meter.scope("MUX");
    const size_t m = x.size();
    const Ring ring = ctx.cfg.ring();

    if (ctx.role == PartyRole::Helper) {
        Bytes b0 = ctx.recv_from(PartyRole::Proxy0);
        Bytes b1 = ctx.recv_from(PartyRole::Proxy1);
        ByteReader r0(b0), r1(b1);
        Bytes reply0, reply1;
        for (size_t e = 0; e < m; ++e) {
            u64 m2 = r0.get_u64(), m3 = r0.get_u64();
            u64 m5 = r1.get_u64(), m6 = r1.get_u64();
            u64 z = ring.add(ring.mul(m2, m5), ring.mul(m3, m6));
            auto [z0, z1] = split(z, ring, ctx.rng);
            put_u64(reply0, z0);
            put_u64(reply1, z1);
        }
        ctx.send_to(PartyRole::Proxy0, reply0);
        ctx.send_to(PartyRole::Proxy1, reply1);
        return {};
    }

    if (x.size() != y.size() || x.size() != b.size())
        throw UsageError("multiplexer: length mismatch");
    const int i = ctx.party_index();

    std::vector<std::array<u64, 4>> r(m);
    for (auto& quad : r)
        for (auto& v : quad) v = ctx.coin.ring_element(ring);

    Bytes to_helper;
    std::vector<u64> keep(m);
    for (size_t e = 0; e < m; ++e) {
        const auto& q = r[e];
        u64 diff = ring.sub(x[e].v, y[e].v);
        if (i == 0) {
            // M1 = x0 - b0(x0-y0) + r1 b0 + r2(x0-y0) + r2 r3; send (b0+r0, diff+r3)
            u64 m1 = ring.sub(x[e].v, ring.mul(b[e].v, diff));
            m1 = ring.add(m1, ring.mul(q[1], b[e].v));
            m1 = ring.add(m1, ring.mul(q[2], diff));
            m1 = ring.add(m1, ring.mul(q[2], q[3]));
            keep[e] = m1;
            put_u64(to_helper, ring.add(b[e].v, q[0]));
            put_u64(to_helper, ring.add(diff, q[3]));
        } else {
            // M4 = x1 - b1(x1-y1) + r0(x1-y1) + r0 r1 + r3 b1; send (diff+r1, b1+r2)
            u64 m4 = ring.sub(x[e].v, ring.mul(b[e].v, diff));
            m4 = ring.add(m4, ring.mul(q[0], diff));
            m4 = ring.add(m4, ring.mul(q[0], q[1]));
            m4 = ring.add(m4, ring.mul(q[3], b[e].v));
            keep[e] = m4;
            put_u64(to_helper, ring.add(diff, q[1]));
            put_u64(to_helper, ring.add(b[e].v, q[2]));
        }
    }
    ctx.send_to(PartyRole::Helper, to_helper);
    ctx.meter.round();

    Bytes reply = ctx.recv_from(PartyRole::Helper);
    ctx.meter.round();
    ByteReader rr(reply);
    ArithVec out(m);
    for (size_t e = 0; e < m; ++e) out[e].v = ring.sub(keep[e], rr.get_u64());
    return out;
}

// --- Matrix products over shares ----------------------------------------------

namespace detail {

// rows x inner times inner x cols, row-major, in the ring (no truncation).
inline std::vector<u64> ring_matmul(const std::vector<u64>& a, const std::vector<u64>& b,
                                    size_t rows, size_t inner, size_t cols, const Ring& ring) {
    std::vector<u64> c(rows * cols, 0);
    for (size_t i = 0; i < rows; ++i)
        for (size_t k = 0; k < inner; ++k) {
            u64 aik = a[i * inner + k];
            if (aik == 0) continue;
            for (size_t j = 0; j < cols; ++j)
                c[i * cols + j] = ring.add(c[i * cols + j], ring.mul(aik, b[k * cols + j]));
        }
    return c;
}

} // namespace detail

// Matrix product of shared matrices (row-major), backed by one matrix triple
// (A', B', C' = A'B') so the opened masks stay quadratic in the dimensions.
// Entries are summed at doubled scale and truncated once.
inline ArithVec matmul(ProtocolContext& ctx, const ArithVec& A, const ArithVec& B, size_t rows,
                       size_t inner, size_t cols) {
    auto scope = ctx.meter.scope("MUL");
    const Ring ring = ctx.cfg.ring();

    if (ctx.role == PartyRole::Helper) {
        if (ctx.online_dealing) {
            std::vector<u64> a(rows * inner), b(inner * cols);
            for (auto& v : a) v = ctx.rng() & ring.mask;
            for (auto& v : b) v = ctx.rng() & ring.mask;
            auto c = detail::ring_matmul(a, b, rows, inner, cols, ring);
            Bytes f0, f1;
            auto split_into = [&](const std::vector<u64>& m) {
                for (u64 v : m) {
                    auto [s0, s1] = split(v, ring, ctx.rng);
                    put_u64(f0, s0);
                    put_u64(f1, s1);
                }
            };
            split_into(a);
            split_into(b);
            split_into(c);
            ctx.send_to(PartyRole::Proxy0, f0);
            ctx.send_to(PartyRole::Proxy1, f1);
        }
        return {};
    }

    if (A.size() != rows * inner || B.size() != inner * cols)
        throw UsageError("matmul: dimension mismatch");
    if (!ctx.online_dealing)
        throw UsageError("matmul: matrix triples are dealt online only");
    const int i = ctx.party_index();

    std::vector<u64> ta(rows * inner), tb(inner * cols), tc(rows * cols);
    {
        Bytes f = ctx.recv_from(PartyRole::Helper);
        ByteReader r(f);
        for (auto& v : ta) v = r.get_u64();
        for (auto& v : tb) v = r.get_u64();
        for (auto& v : tc) v = r.get_u64();
        ctx.meter.round();
    }

    // Open E = A - A' and F = B - B'.
    Bytes mine;
    std::vector<u64> E(rows * inner), F(inner * cols);
    for (size_t k = 0; k < E.size(); ++k) put_u64(mine, E[k] = ring.sub(A[k].v, ta[k]));
    for (size_t k = 0; k < F.size(); ++k) put_u64(mine, F[k] = ring.sub(B[k].v, tb[k]));
    Bytes theirs = ctx.exchange_with_twin(mine);
    ByteReader rd(theirs);
    for (auto& v : E) v = ring.add(v, rd.get_u64());
    for (auto& v : F) v = ring.add(v, rd.get_u64());

    // Z_i = i*EF + E B'_i + A'_i F + C'_i
    auto z = detail::ring_matmul(E, tb, rows, inner, cols, ring);
    auto afv = detail::ring_matmul(ta, F, rows, inner, cols, ring);
    for (size_t k = 0; k < z.size(); ++k) z[k] = ring.add(z[k], ring.add(afv[k], tc[k]));
    if (i == 1) {
        auto ef = detail::ring_matmul(E, F, rows, inner, cols, ring);
        for (size_t k = 0; k < z.size(); ++k) z[k] = ring.add(z[k], ef[k]);
    }

    ArithVec out(rows * cols);
    for (size_t k = 0; k < z.size(); ++k)
        out[k] = truncate_share(ArithShare{z[k]}, i, ctx.cfg);
    return out;
}

inline ArithVec matvec(ProtocolContext& ctx, const ArithVec& A, const ArithVec& x, size_t rows,
                       size_t inner) {
    return matmul(ctx, A, x, rows, inner, 1);
}

} // namespace mpc3
