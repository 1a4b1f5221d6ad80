#pragma once

// Shared helpers for driving protocol ops over the in-process trio in tests.

#include <random>

#include "mpc3/protocols.hpp"
#include "mpc3/trio.hpp"

namespace mpc3::testutil {

template <class Rng>
inline std::pair<ArithVec, ArithVec> make_shares(const std::vector<u64>& plain, const Ring& ring,
                                                 Rng& rng) {
    ArithVec s0(plain.size()), s1(plain.size());
    for (size_t i = 0; i < plain.size(); ++i) {
        auto [a, b] = split(plain[i], ring, rng);
        s0[i].v = a;
        s1[i].v = b;
    }
    return {s0, s1};
}

template <class Rng>
inline std::pair<HalfVec, HalfVec> make_half_shares(const std::vector<u64>& plain,
                                                    const Ring& half, Rng& rng) {
    HalfVec s0(plain.size()), s1(plain.size());
    for (size_t i = 0; i < plain.size(); ++i) {
        auto [a, b] = split(plain[i], half, rng);
        s0[i].v = a;
        s1[i].v = b;
    }
    return {s0, s1};
}

inline std::vector<u64> recon(const ArithVec& a, const ArithVec& b, const Ring& ring) {
    std::vector<u64> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = ring.add(a[i].v, b[i].v);
    return out;
}

// Runs `fn(ctx, input_for_this_party)` on all three parties. in0/in1 are the
// proxy inputs; the helper gets size-only placeholders built from in0.
template <class Vec, class Fn>
inline TrioResult<ArithVec> run_op(const FixedPointConfig& cfg, u64 seed, const Vec& in0,
                                   const Vec& in1, Fn fn, bool record_transcript = false) {
    TrioOptions opt;
    opt.cfg = cfg;
    opt.seed = seed;
    opt.record_transcript = record_transcript;
    Vec placeholder(in0.size());
    return run_trio(opt, [&](ProtocolContext& ctx) -> ArithVec {
        const Vec& mine = ctx.role == PartyRole::Proxy0   ? in0
                          : ctx.role == PartyRole::Proxy1 ? in1
                                                          : placeholder;
        return fn(ctx, mine);
    });
}

} // namespace mpc3::testutil
