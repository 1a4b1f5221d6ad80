#pragma once

#include <sstream>

#include "mpc3/exponential.hpp"
#include "mpc3/invsqrt.hpp"
#include "mpc3/trio.hpp"

namespace mpc3::checks {

// Oracle suites runnable from the CLI and the acceptance harness: each pits
// a protocol against an independent plaintext definition, exhaustively on
// the 8-bit ring where that is feasible.

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline const FixedPointConfig kTiny{8, 2};
inline const FixedPointConfig kFull{64, 20};

template <class Rng>
inline std::pair<ArithVec, ArithVec> split_all(const std::vector<u64>& plain, const Ring& ring,
                                               Rng& rng) {
    ArithVec s0(plain.size()), s1(plain.size());
    for (size_t i = 0; i < plain.size(); ++i) {
        auto [a, b] = split(plain[i], ring, rng);
        s0[i].v = a;
        s1[i].v = b;
    }
    return {s0, s1};
}

template <class In, class Fn>
inline TrioResult<ArithVec> run_parties(const FixedPointConfig& cfg, u64 seed, const In& in0,
                                        const In& in1, Fn fn) {
    TrioOptions opt;
    opt.cfg = cfg;
    opt.seed = seed;
    In placeholder(in0.size());
    return run_trio(opt, [&](ProtocolContext& ctx) -> ArithVec {
        const In& mine = ctx.role == PartyRole::Proxy0   ? in0
                         : ctx.role == PartyRole::Proxy1 ? in1
                                                         : placeholder;
        return fn(ctx, mine);
    });
}

inline std::vector<u64> rec(const TrioResult<ArithVec>& r, const Ring& ring) {
    std::vector<u64> out(r.p0().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = ring.add(r.p0()[i].v, r.p1()[i].v);
    return out;
}

} // namespace detail

// All 128 half-ring values, all 128 share splits; conversion must embed
// identically into the full ring.
inline CheckResult check_moc_exhaustive(u64 seed) {
    using namespace detail;
    const Ring half = kTiny.half_ring();
    const u64 hs = 128;
    HalfVec x0(hs * hs), x1(hs * hs);
    std::vector<u64> expect(hs * hs);
    for (u64 x = 0; x < hs; ++x)
        for (u64 s = 0; s < hs; ++s) {
            size_t i = x * hs + s;
            x0[i].v = s;
            x1[i].v = half.sub(x, s);
            expect[i] = x;
        }
    auto res = run_parties(kTiny, seed, x0, x1, [](ProtocolContext& ctx, const HalfVec& in) {
        return modulus_conversion(ctx, in);
    });
    auto out = rec(res, kTiny.ring());
    u64 bad = 0;
    for (size_t i = 0; i < out.size(); ++i) bad += out[i] != expect[i];
    return {"moc-exhaustive", bad == 0,
            std::to_string(out.size()) + " conversions, " + std::to_string(bad) + " mismatches"};
}

// All 256 ring values, share splits strided over the ring.
inline CheckResult check_msb_exhaustive(u64 seed) {
    using namespace detail;
    const Ring ring = kTiny.ring();
    const size_t splits = 64;
    ArithVec x0(256 * splits), x1(256 * splits);
    std::vector<u64> expect(256 * splits);
    for (u64 x = 0; x < 256; ++x)
        for (u64 s = 0; s < splits; ++s) {
            size_t i = x * splits + s;
            u64 share0 = s * 4 + (x & 3);
            x0[i].v = share0;
            x1[i].v = ring.sub(x, share0);
            expect[i] = x >> 7;
        }
    auto res = run_parties(kTiny, seed, x0, x1, [](ProtocolContext& ctx, const ArithVec& in) {
        return most_significant_bit(ctx, in);
    });
    auto out = rec(res, ring);
    u64 bad = 0;
    for (size_t i = 0; i < out.size(); ++i) bad += out[i] != expect[i];
    return {"msb-exhaustive", bad == 0,
            std::to_string(out.size()) + " extractions, " + std::to_string(bad) + " mismatches"};
}

// All 256 x 256 pairs against the signed-difference oracle.
inline CheckResult check_cmp_exhaustive(u64 seed) {
    using namespace detail;
    const Ring ring = kTiny.ring();
    std::vector<u64> x(256 * 256), y(256 * 256);
    for (u64 a = 0; a < 256; ++a)
        for (u64 b = 0; b < 256; ++b) {
            x[a * 256 + b] = a;
            y[a * 256 + b] = b;
        }
    std::mt19937_64 rng(seed ^ 0xC3);
    auto [x0, x1] = split_all(x, ring, rng);
    auto [y0, y1] = split_all(y, ring, rng);
    struct In {
        ArithVec a, b;
        size_t size() const { return a.size(); }
        explicit In(size_t n = 0) : a(n), b(n) {}
        In(ArithVec av, ArithVec bv) : a(std::move(av)), b(std::move(bv)) {}
    };
    In i0{x0, y0}, i1{x1, y1};
    auto res = run_parties(kTiny, seed, i0, i1, [](ProtocolContext& ctx, const In& in) {
        return compare(ctx, in.a, in.b);
    });
    auto out = rec(res, ring);
    u64 bad = 0;
    for (size_t i = 0; i < out.size(); ++i) {
        u64 expect = ring.sub(x[i], y[i]) >> 7;
        bad += out[i] != expect;
    }
    return {"cmp-exhaustive", bad == 0,
            std::to_string(out.size()) + " comparisons, " + std::to_string(bad) + " mismatches"};
}

// All 8-bit (r, y) pairs, both common-bit values, against r > y.
inline CheckResult check_pc_exhaustive(u64 seed) {
    using namespace detail;
    u64 bad = 0, total = 0;
    for (u8 beta : {0, 1}) {
        std::vector<u64> r(256 * 256), y(256 * 256);
        for (u64 a = 0; a < 256; ++a)
            for (u64 b = 0; b < 256; ++b) {
                r[a * 256 + b] = a;
                y[a * 256 + b] = b;
            }
        std::mt19937_64 rng(seed ^ beta);
        struct In {
            std::vector<FieldBitShares> bits;
            size_t size() const { return bits.size(); }
            explicit In(size_t n = 0) : bits(n) {}
        };
        In i0(r.size()), i1(r.size());
        for (size_t i = 0; i < r.size(); ++i) {
            auto [a, b] = split_bits(r[i], 8, rng);
            i0.bits[i] = std::move(a);
            i1.bits[i] = std::move(b);
        }
        std::vector<u8> betas(r.size(), beta);
        auto res = run_parties(kTiny, seed + beta, i0, i1,
                               [&](ProtocolContext& ctx, const In& in) -> ArithVec {
                                   auto bits = private_compare(ctx, in.bits, y, betas);
                                   ArithVec v(bits.size());
                                   for (size_t k = 0; k < bits.size(); ++k) v[k].v = bits[k].bit;
                                   return v;
                               });
        for (size_t i = 0; i < r.size(); ++i) {
            u8 got = static_cast<u8>(res.p0()[i].v ^ res.p1()[i].v);
            u8 expect = static_cast<u8>(((r[i] > y[i]) ? 1 : 0) ^ beta);
            bad += got != expect;
            total++;
        }
    }
    return {"pc-exhaustive", bad == 0,
            std::to_string(total) + " predicates, " + std::to_string(bad) + " mismatches"};
}

// 1e5 random in-range products at n=64, dec=20: decode error per
// multiplication bounded by 2^{1-dec}.
inline CheckResult check_mul_sweep(u64 seed) {
    using namespace detail;
    const Ring ring = kFull.ring();
    const size_t m = 100000;
    std::mt19937_64 rng(seed ^ 0x5EED);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<u64> x(m), y(m);
    std::vector<double> expect(m);
    for (size_t i = 0; i < m; ++i) {
        x[i] = encode(dist(rng), kFull);
        y[i] = encode(dist(rng), kFull);
        expect[i] = decode(x[i], kFull) * decode(y[i], kFull);
    }
    auto [x0, x1] = split_all(x, ring, rng);
    auto [y0, y1] = split_all(y, ring, rng);
    struct In {
        ArithVec a, b;
        size_t size() const { return a.size(); }
        explicit In(size_t n = 0) : a(n), b(n) {}
        In(ArithVec av, ArithVec bv) : a(std::move(av)), b(std::move(bv)) {}
    };
    In i0{x0, y0}, i1{x1, y1};
    auto res = run_parties(kFull, seed, i0, i1, [](ProtocolContext& ctx, const In& in) {
        return mul(ctx, in.a, in.b);
    });
    auto out = rec(res, ring);
    double max_err = 0;
    for (size_t i = 0; i < m; ++i)
        max_err = std::max(max_err, std::fabs(decode(out[i], kFull) - expect[i]));
    const double bound = 2.0 * kFull.resolution();
    std::ostringstream detail_text;
    detail_text << m << " products, max |error| = " << max_err << " (bound " << bound << ")";
    return {"mul-sweep", max_err <= bound, detail_text.str()};
}

// Private exponential against the fixed-point oracle, libm, and the
// sign-symmetry identity.
struct ExpSweepReport {
    double max_vs_oracle_ratio = 0;   // |priv - oracle| / tree bound
    double max_vs_libm_scaled = 0;    // |priv - e^x| / max(1, e^x)
    double max_sign_symmetry_dev = 0; // |EXP(x) EXP(-x) - 1|
    bool passed = false;
};

inline ExpSweepReport exp_sweep_report(u64 seed) {
    using namespace detail;
    const double e = std::exp(1.0);
    const Ring ring = kFull.ring();

    std::vector<double> xs;
    std::mt19937_64 grid_rng(seed ^ 0xE1);
    std::uniform_real_distribution<double> wide(-10.0, 10.0);
    for (int i = 0; i < 160; ++i) xs.push_back(wide(grid_rng)); // dense random powers
    for (double x = -10.0; x <= 10.0; x += 0.5) xs.push_back(x);

    // Sign-symmetry grid: half steps to |x| = 5, plus dense draws within
    // |x| <= 3 where the format's relative resolution supports the bound.
    std::vector<double> sym;
    for (double x = 0.5; x <= 5.001; x += 0.5) sym.push_back(x);
    std::uniform_real_distribution<double> densish(0.1, 3.0);
    for (int i = 0; i < 10; ++i) sym.push_back(densish(grid_rng));

    std::vector<double> all = xs;
    for (double x : sym) {
        all.push_back(x);
        all.push_back(-x);
    }

    std::vector<u64> codes(all.size());
    for (size_t i = 0; i < all.size(); ++i) codes[i] = encode(all[i], kFull);
    std::mt19937_64 rng(seed ^ 0xE2);
    auto [x0, x1] = split_all(codes, ring, rng);
    auto res = run_parties(kFull, seed, x0, x1, [&](ProtocolContext& ctx, const ArithVec& in) {
        return exponential(ctx, in, e);
    });
    auto out = rec(res, ring);
    std::vector<double> vals(out.size());
    for (size_t i = 0; i < out.size(); ++i) vals[i] = decode(out[i], kFull);

    ExpSweepReport rep;
    for (size_t i = 0; i < xs.size(); ++i) {
        double oracle = plaintext_exp_oracle(xs[i], e, kFull);
        double bound = exp_tree_error_bound(oracle, kFull);
        rep.max_vs_oracle_ratio = std::max(rep.max_vs_oracle_ratio,
                                           std::fabs(vals[i] - oracle) / bound);
        double truth = std::exp(xs[i]);
        rep.max_vs_libm_scaled = std::max(rep.max_vs_libm_scaled,
                                          std::fabs(vals[i] - truth) / std::max(1.0, truth));
    }
    for (size_t i = 0; i < sym.size(); ++i) {
        double pos = vals[xs.size() + 2 * i];
        double neg = vals[xs.size() + 2 * i + 1];
        rep.max_sign_symmetry_dev = std::max(rep.max_sign_symmetry_dev,
                                             std::fabs(pos * neg - 1.0));
    }
    rep.passed = rep.max_vs_oracle_ratio <= 1.0 && rep.max_vs_libm_scaled <= 1e-4 &&
                 rep.max_sign_symmetry_dev <= 2e-4;
    return rep;
}

inline CheckResult check_exp_sweep(u64 seed) {
    auto rep = exp_sweep_report(seed);
    std::ostringstream d;
    d << "oracle-bound ratio " << rep.max_vs_oracle_ratio << ", libm scaled err "
      << rep.max_vs_libm_scaled << " (<= 1e-4), sign symmetry " << rep.max_sign_symmetry_dev
      << " (<= 2e-4)";
    return {"exp-sweep", rep.passed, d.str()};
}

// 50 random well-conditioned q=16 Gram matrices must satisfy the defining
// property within 1e-2; an ill-conditioned instance must abort.
struct InvsqrtSuiteReport {
    double max_defining_error = 0;
    bool aborted_on_ill_conditioned = false;
    bool passed = false;
};

inline InvsqrtSuiteReport invsqrt_suite_report(u64 seed, size_t trials = 50) {
    using namespace detail;
    const size_t q = 16;
    const Ring ring = kFull.ring();
    InvsqrtSuiteReport rep;

    for (size_t trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(seed ^ (1000 + trial));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<std::vector<double>> vecs(q, std::vector<double>(24));
        for (auto& v : vecs) {
            double norm = 0;
            for (auto& x : v) {
                x = normal(rng);
                norm += x * x;
            }
            norm = std::sqrt(norm);
            for (auto& x : v) x /= norm;
        }
        std::vector<double> g(q * q);
        for (size_t i = 0; i < q; ++i)
            for (size_t j = 0; j < q; ++j) {
                double dot = 0;
                for (size_t kk = 0; kk < 24; ++kk) dot += vecs[i][kk] * vecs[j][kk];
                g[i * q + j] = 0.9 * dot + (i == j ? 0.1 : 0.0);
            }

        std::vector<u64> codes(q * q);
        for (size_t i = 0; i < codes.size(); ++i) codes[i] = encode(g[i], kFull);
        auto [g0, g1] = split_all(codes, ring, rng);
        auto res = run_parties(kFull, seed + trial, g0, g1,
                               [&](ProtocolContext& ctx, const ArithVec& in) {
                                   return invsqrt(ctx, in, q);
                               });
        auto out = rec(res, ring);
        std::vector<double> r(out.size());
        for (size_t i = 0; i < out.size(); ++i) r[i] = decode(out[i], kFull);

        // max |R R G - I|
        std::vector<double> rr(q * q, 0.0);
        for (size_t i = 0; i < q; ++i)
            for (size_t kk = 0; kk < q; ++kk)
                for (size_t j = 0; j < q; ++j)
                    rr[i * q + j] += r[i * q + kk] * r[kk * q + j];
        for (size_t i = 0; i < q; ++i)
            for (size_t j = 0; j < q; ++j) {
                double acc = 0;
                for (size_t kk = 0; kk < q; ++kk) acc += rr[i * q + kk] * g[kk * q + j];
                rep.max_defining_error =
                    std::max(rep.max_defining_error, std::fabs(acc - (i == j ? 1.0 : 0.0)));
            }
    }

    // Ill-conditioned: duplicate anchors, no ridge; smallest eigenvalue ~0.
    {
        std::vector<double> g{1.0, 0.9995, 0.2, 0.1, 0.9995, 1.0,  0.2, 0.1,
                              0.2, 0.2,    1.0, 0.3, 0.1,    0.1,  0.3, 1.0};
        std::vector<u64> codes(16);
        for (size_t i = 0; i < 16; ++i) codes[i] = encode(g[i], kFull);
        std::mt19937_64 rng(seed ^ 0xBAD);
        auto [g0, g1] = split_all(codes, ring, rng);
        try {
            run_parties(kFull, seed ^ 0xBAD, g0, g1, [&](ProtocolContext& ctx, const ArithVec& in) {
                return invsqrt(ctx, in, 4);
            });
        } catch (const ProtocolAbort&) {
            rep.aborted_on_ill_conditioned = true;
        }
    }

    rep.passed = rep.max_defining_error <= 1e-2 && rep.aborted_on_ill_conditioned;
    return rep;
}

inline CheckResult check_invsqrt_suite(u64 seed, size_t trials = 50) {
    auto rep = invsqrt_suite_report(seed, trials);
    std::ostringstream d;
    d << trials << " Grams, max |R R G - I| = " << rep.max_defining_error << " (<= 1e-2), "
      << (rep.aborted_on_ill_conditioned ? "aborted" : "DID NOT abort")
      << " on the ill-conditioned instance";
    return {"invsqrt-suite", rep.passed, d.str()};
}

inline CheckResult check_mux_oracle(u64 seed) {
    using namespace detail;
    const Ring ring = kFull.ring();
    const size_t m = 4096;
    std::mt19937_64 rng(seed ^ 0xA1);
    std::uniform_real_distribution<double> dist(-500.0, 500.0);
    std::vector<u64> x(m), y(m), b(m);
    for (size_t i = 0; i < m; ++i) {
        x[i] = encode(dist(rng), kFull);
        y[i] = encode(dist(rng), kFull);
        b[i] = rng() & 1;
    }
    auto [x0, x1] = split_all(x, ring, rng);
    auto [y0, y1] = split_all(y, ring, rng);
    auto [b0, b1] = split_all(b, ring, rng);
    struct In {
        ArithVec x, y, b;
        size_t size() const { return x.size(); }
        explicit In(size_t n = 0) : x(n), y(n), b(n) {}
        In(ArithVec xv, ArithVec yv, ArithVec bv)
            : x(std::move(xv)), y(std::move(yv)), b(std::move(bv)) {}
    };
    In i0{x0, y0, b0}, i1{x1, y1, b1};
    auto res = run_parties(kFull, seed, i0, i1, [](ProtocolContext& ctx, const In& in) {
        return multiplexer(ctx, in.x, in.y, in.b);
    });
    auto out = rec(res, ring);
    u64 bad = 0;
    for (size_t i = 0; i < m; ++i) bad += out[i] != (b[i] ? y[i] : x[i]);
    return {"mux-oracle", bad == 0,
            std::to_string(m) + " selections, " + std::to_string(bad) + " ring mismatches"};
}

} // namespace mpc3::checks
