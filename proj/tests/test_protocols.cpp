#include <catch2/catch_amalgamated.hpp>

#include "trio_test_util.hpp"

using namespace mpc3;
using namespace mpc3::testutil;

namespace {

const FixedPointConfig kCfg{64, 20};
const FixedPointConfig kTiny{8, 2};

// Two-input ops share this shape: split both operands, run, reconstruct.
template <class Fn>
std::vector<u64> run_binary(const FixedPointConfig& cfg, u64 seed, const std::vector<u64>& x,
                            const std::vector<u64>& y, Fn op) {
    std::mt19937_64 rng(seed ^ 0xABCD);
    auto [x0, x1] = make_shares(x, cfg.ring(), rng);
    auto [y0, y1] = make_shares(y, cfg.ring(), rng);
    struct In {
        ArithVec a, b;
        size_t size() const { return a.size(); }
        explicit In(size_t n = 0) : a(n), b(n) {}
        In(ArithVec av, ArithVec bv) : a(std::move(av)), b(std::move(bv)) {}
    };
    In i0{x0, y0}, i1{x1, y1};
    auto res = run_op(cfg, seed, i0, i1,
                      [&](ProtocolContext& ctx, const In& in) { return op(ctx, in.a, in.b); });
    return recon(res.p0(), res.p1(), cfg.ring());
}

} // namespace

TEST_CASE("MUL reconstructs products within the truncation bound") {
    SECTION("2.5 * 4.0") {
        auto out = run_binary(kCfg, 1, {encode(2.5, kCfg)}, {encode(4.0, kCfg)},
                              [](auto& ctx, const auto& a, const auto& b) { return mul(ctx, a, b); });
        CHECK(decode(out[0], kCfg) == Catch::Approx(10.0).margin(2 * kCfg.resolution()));
    }

    SECTION("x * 0") {
        auto out = run_binary(kCfg, 2, {encode(123.25, kCfg)}, {encode(0.0, kCfg)},
                              [](auto& ctx, const auto& a, const auto& b) { return mul(ctx, a, b); });
        CHECK(std::fabs(decode(out[0], kCfg)) <= 2 * kCfg.resolution());
    }

    SECTION("random vectors, length 1000") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<u64> x(1000), y(1000);
        std::vector<double> ex(1000);
        for (size_t i = 0; i < x.size(); ++i) {
            double a = dist(rng), b = dist(rng);
            x[i] = encode(a, kCfg);
            y[i] = encode(b, kCfg);
            ex[i] = decode(x[i], kCfg) * decode(y[i], kCfg);
        }
        auto out = run_binary(kCfg, 4, x, y,
                              [](auto& ctx, const auto& a, const auto& b) { return mul(ctx, a, b); });
        double max_err = 0;
        for (size_t i = 0; i < out.size(); ++i)
            max_err = std::max(max_err, std::fabs(decode(out[i], kCfg) - ex[i]));
        CHECK(max_err <= 2 * kCfg.resolution());
    }
}

TEST_CASE("DP computes dot products") {
    SECTION("matching one-hots give 1") {
        std::vector<u64> x{encode(0, kCfg), encode(1.0, kCfg), 0, 0};
        auto out = run_binary(kCfg, 5, x, x, [](auto& ctx, const auto& a, const auto& b) {
            return dot_product(ctx, a, b);
        });
        CHECK(decode(out[0], kCfg) == Catch::Approx(1.0).margin(2 * kCfg.resolution()));
    }

    SECTION("orthogonal one-hots give 0") {
        std::vector<u64> x{encode(1.0, kCfg), 0, 0, 0};
        std::vector<u64> y{0, encode(1.0, kCfg), 0, 0};
        auto out = run_binary(kCfg, 6, x, y, [](auto& ctx, const auto& a, const auto& b) {
            return dot_product(ctx, a, b);
        });
        CHECK(std::fabs(decode(out[0], kCfg)) <= 2 * kCfg.resolution());
    }

    SECTION("random 64-vectors vs plaintext") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<u64> x(64), y(64);
        double expect = 0;
        for (size_t i = 0; i < 64; ++i) {
            x[i] = encode(dist(rng), kCfg);
            y[i] = encode(dist(rng), kCfg);
            expect += decode(x[i], kCfg) * decode(y[i], kCfg);
        }
        auto out = run_binary(kCfg, 8, x, y, [](auto& ctx, const auto& a, const auto& b) {
            return dot_product(ctx, a, b);
        });
        CHECK(std::fabs(decode(out[0], kCfg) - expect) <= 64 * 2 * kCfg.resolution());
    }
}

TEST_CASE("PC: bitwise greater-than against the plaintext oracle") {
    auto run_pc = [](const FixedPointConfig& cfg, u64 seed, const std::vector<u64>& r,
                     const std::vector<u64>& y, u8 beta, unsigned nbits) {
        std::mt19937_64 rng(seed);
        std::vector<FieldBitShares> rb0(r.size()), rb1(r.size());
        for (size_t i = 0; i < r.size(); ++i) {
            auto [a, b] = split_bits(r[i], nbits, rng);
            rb0[i] = a;
            rb1[i] = b;
        }
        struct In {
            std::vector<FieldBitShares> bits;
            size_t size() const { return bits.size(); }
            explicit In(size_t n = 0) : bits(n) {}
            explicit In(std::vector<FieldBitShares> b) : bits(std::move(b)) {}
        };
        In i0{rb0}, i1{rb1};
        std::vector<u8> betas(r.size(), beta);
        auto res = run_op(cfg, seed, i0, i1, [&](ProtocolContext& ctx, const In& in) -> ArithVec {
            auto bools = private_compare(ctx, in.bits, y, betas);
            ArithVec as(bools.size());
            for (size_t k = 0; k < bools.size(); ++k) as[k].v = bools[k].bit;
            return as;
        });
        // XOR-reconstruct
        std::vector<u8> out(r.size());
        for (size_t i = 0; i < r.size(); ++i)
            out[i] = static_cast<u8>(res.p0()[i].v ^ res.p1()[i].v);
        return out;
    };

    SECTION("examples") {
        auto out = run_pc(kCfg, 11, {5, 3}, {3, 5}, 0, 64);
        CHECK(out[0] == 1); // 5 > 3
        CHECK(out[1] == 0); // 3 > 5 is false
    }

    SECTION("exhaustive 8-bit, both common-bit values") {
        std::vector<u64> r(256 * 256), y(256 * 256);
        for (u64 a = 0; a < 256; ++a)
            for (u64 b = 0; b < 256; ++b) {
                r[a * 256 + b] = a;
                y[a * 256 + b] = b;
            }
        for (u8 beta : {0, 1}) {
            auto out = run_pc(kTiny, 12 + beta, r, y, beta, 8);
            u64 mismatches = 0;
            for (size_t i = 0; i < out.size(); ++i) {
                u8 expect = static_cast<u8>((r[i] > y[i]) ? 1 : 0) ^ beta;
                if (out[i] != expect) mismatches++;
            }
            CHECK(mismatches == 0);
        }
    }
}

TEST_CASE("MOC: ring conversion equals the identity embedding") {
    auto run_moc = [](const FixedPointConfig& cfg, u64 seed, const HalfVec& x0, const HalfVec& x1) {
        auto res = run_op(cfg, seed, x0, x1, [&](ProtocolContext& ctx, const HalfVec& in) {
            return modulus_conversion(ctx, in);
        });
        return recon(res.p0(), res.p1(), cfg.ring());
    };

    SECTION("small values and the half-ring maximum") {
        std::mt19937_64 rng(13);
        std::vector<u64> xs{5, 0, kCfg.half_size() - 1, 1};
        auto [x0, x1] = make_half_shares(xs, kCfg.half_ring(), rng);
        auto out = run_moc(kCfg, 14, x0, x1);
        for (size_t i = 0; i < xs.size(); ++i) CHECK(out[i] == xs[i]);
    }

    SECTION("exhaustive n=8: all values and all share splits") {
        const Ring half = kTiny.half_ring();
        const u64 half_size = 128;
        HalfVec x0(half_size * half_size), x1(half_size * half_size);
        std::vector<u64> expect(half_size * half_size);
        for (u64 x = 0; x < half_size; ++x)
            for (u64 s = 0; s < half_size; ++s) {
                size_t idx = x * half_size + s;
                x0[idx].v = s;
                x1[idx].v = half.sub(x, s);
                expect[idx] = x;
            }
        auto out = run_moc(kTiny, 15, x0, x1);
        u64 mismatches = 0;
        for (size_t i = 0; i < out.size(); ++i)
            if (out[i] != expect[i]) mismatches++;
        CHECK(mismatches == 0);
    }
}

TEST_CASE("MSB: sign extraction matches the top-bit oracle") {
    auto run_msb = [](const FixedPointConfig& cfg, u64 seed, const ArithVec& x0, const ArithVec& x1) {
        auto res = run_op(cfg, seed, x0, x1, [&](ProtocolContext& ctx, const ArithVec& in) {
            return most_significant_bit(ctx, in);
        });
        return recon(res.p0(), res.p1(), cfg.ring());
    };

    SECTION("sign law on encoded reals") {
        std::mt19937_64 rng(16);
        std::vector<u64> xs{encode(-3.42, kCfg), encode(3.42, kCfg), encode(0.0, kCfg)};
        auto [x0, x1] = make_shares(xs, kCfg.ring(), rng);
        auto out = run_msb(kCfg, 17, x0, x1);
        CHECK(out[0] == 1);
        CHECK(out[1] == 0);
        CHECK(out[2] == 0);
    }

    SECTION("exhaustive n=8: all values and all share splits") {
        const Ring ring = kTiny.ring();
        ArithVec x0(256 * 64), x1(256 * 64);
        std::vector<u64> expect(256 * 64);
        // All 256 values; share splits strided over the full ring.
        for (u64 x = 0; x < 256; ++x)
            for (u64 s = 0; s < 64; ++s) {
                size_t idx = x * 64 + s;
                u64 share0 = s * 4 + (x & 3);
                x0[idx].v = share0;
                x1[idx].v = ring.sub(x, share0);
                expect[idx] = x >> 7;
            }
        auto out = run_msb(kTiny, 18, x0, x1);
        u64 mismatches = 0;
        for (size_t i = 0; i < out.size(); ++i)
            if (out[i] != expect[i]) mismatches++;
        CHECK(mismatches == 0);
    }
}

TEST_CASE("CMP: 0 iff x >= y") {
    auto out = run_binary(kCfg, 19, {encode(5.0, kCfg), encode(3.0, kCfg), encode(7.5, kCfg)},
                          {encode(3.0, kCfg), encode(5.0, kCfg), encode(7.5, kCfg)},
                          [](auto& ctx, const auto& a, const auto& b) { return compare(ctx, a, b); });
    CHECK(out[0] == 0); // 5 >= 3
    CHECK(out[1] == 1); // 3 < 5
    CHECK(out[2] == 0); // ties are >=

    SECTION("exhaustive n=8 against the signed-difference oracle") {
        const Ring ring = kTiny.ring();
        std::vector<u64> x(256 * 256), y(256 * 256);
        for (u64 a = 0; a < 256; ++a)
            for (u64 b = 0; b < 256; ++b) {
                x[a * 256 + b] = a;
                y[a * 256 + b] = b;
            }
        auto out8 = run_binary(kTiny, 20, x, y, [](auto& ctx, const auto& a, const auto& b) {
            return compare(ctx, a, b);
        });
        u64 mismatches = 0;
        for (size_t i = 0; i < out8.size(); ++i) {
            u64 diff = ring.sub(x[i], y[i]);
            u64 expect = diff >> 7; // sign bit of x - y in Z_256
            if (out8[i] != expect) mismatches++;
        }
        CHECK(mismatches == 0);
    }
}

TEST_CASE("MUX selects per the secret bit") {
    std::mt19937_64 rng(21);
    const size_t m = 512;
    std::vector<u64> x(m), y(m), b(m);
    std::uniform_real_distribution<double> dist(-100.0, 100.0);
    for (size_t i = 0; i < m; ++i) {
        x[i] = encode(dist(rng), kCfg);
        y[i] = encode(dist(rng), kCfg);
        b[i] = rng() & 1;
    }
    b[0] = 0;
    b[1] = 1;

    auto [x0, x1] = make_shares(x, kCfg.ring(), rng);
    auto [y0, y1] = make_shares(y, kCfg.ring(), rng);
    auto [b0, b1] = make_shares(b, kCfg.ring(), rng);
    struct In {
        ArithVec x, y, b;
        size_t size() const { return x.size(); }
        explicit In(size_t n = 0) : x(n), y(n), b(n) {}
        In(ArithVec xv, ArithVec yv, ArithVec bv)
            : x(std::move(xv)), y(std::move(yv)), b(std::move(bv)) {}
    };
    In i0{x0, y0, b0}, i1{x1, y1, b1};
    auto res = run_op(kCfg, 22, i0, i1, [](ProtocolContext& ctx, const In& in) {
        return multiplexer(ctx, in.x, in.y, in.b);
    });
    auto out = recon(res.p0(), res.p1(), kCfg.ring());

    // Exact ring identity: z = x - b(x - y) = (1-b)x + by, no truncation.
    u64 mismatches = 0;
    for (size_t i = 0; i < m; ++i) {
        u64 expect = b[i] ? y[i] : x[i];
        if (out[i] != expect) mismatches++;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("round counts match the reference table") {
    std::mt19937_64 rng(23);
    std::vector<u64> xs(4), ys(4);
    for (auto& v : xs) v = encode(0.25, kCfg);
    for (auto& v : ys) v = encode(-0.5, kCfg);
    auto [x0, x1] = make_shares(xs, kCfg.ring(), rng);
    auto [y0, y1] = make_shares(ys, kCfg.ring(), rng);

    struct In {
        ArithVec x, y;
        size_t size() const { return x.size(); }
        explicit In(size_t n = 0) : x(n), y(n) {}
        In(ArithVec a, ArithVec b) : x(std::move(a)), y(std::move(b)) {}
    };
    In i0{x0, y0}, i1{x1, y1};

    auto check_rounds = [&](const char* label, u64 expected, auto op) {
        auto res = run_op(kCfg, 24, i0, i1,
                          [&](ProtocolContext& ctx, const In& in) { return op(ctx, in); });
        INFO(label);
        CHECK(res.meters[0].stats().at(label).rounds == expected);
        CHECK(res.meters[0].stats().at(label).calls == 1);
    };

    check_rounds("MUL", 2, [](ProtocolContext& c, const In& in) { return mul(c, in.x, in.y); });
    check_rounds("DP", 2,
                 [](ProtocolContext& c, const In& in) { return dot_product(c, in.x, in.y); });
    check_rounds("MSB", 4,
                 [](ProtocolContext& c, const In& in) { return most_significant_bit(c, in.x); });
    check_rounds("CMP", 4, [](ProtocolContext& c, const In& in) { return compare(c, in.x, in.y); });
    check_rounds("MUX", 2, [](ProtocolContext& c, const In& in) {
        ArithVec b(in.x.size()); // shares of zero bits
        return multiplexer(c, in.x, in.y, b);
    });

    // MOC runs on half-ring inputs.
    std::vector<u64> hs(4, 9);
    auto [h0, h1] = make_half_shares(hs, kCfg.half_ring(), rng);
    auto res = run_op(kCfg, 25, h0, h1, [](ProtocolContext& ctx, const HalfVec& in) {
        return modulus_conversion(ctx, in);
    });
    CHECK(res.meters[0].stats().at("MOC").rounds == 4);
}

TEST_CASE("fresh-share outputs look uniform") {
    // Fixed inputs, wide vector: the output shares of P0 should pass the
    // same uniformity sanity check as raw splits.
    const size_t m = 100000;
    std::vector<u64> xs(m, encode(1.5, kCfg)), ys(m, encode(-2.0, kCfg));
    std::mt19937_64 rng(26);
    auto [x0, x1] = make_shares(xs, kCfg.ring(), rng);
    auto [y0, y1] = make_shares(ys, kCfg.ring(), rng);
    struct In {
        ArithVec x, y;
        size_t size() const { return x.size(); }
        explicit In(size_t n = 0) : x(n), y(n) {}
        In(ArithVec a, ArithVec b) : x(std::move(a)), y(std::move(b)) {}
    };
    In i0{x0, y0}, i1{x1, y1};
    auto chi_square = [&](const ArithVec& shares, unsigned top_bit) {
        std::array<u64, 16> buckets{};
        for (const auto& s : shares) buckets[(s.v >> (top_bit - 4)) & 0xF]++;
        double expect = static_cast<double>(shares.size()) / 16.0;
        double chi = 0;
        for (u64 bk : buckets) {
            double d = static_cast<double>(bk) - expect;
            chi += d * d / expect;
        }
        return chi;
    };

    auto res = run_op(kCfg, 27, i0, i1,
                      [](ProtocolContext& c, const In& in) { return mul(c, in.x, in.y); });
    // P0's truncated share is structurally < 2^{n-dec}; check the top live bits.
    CHECK(chi_square(res.p0(), kCfg.n - kCfg.dec) < 37.697);

    auto mres = run_op(kCfg, 28, i0, i1, [](ProtocolContext& c, const In& in) {
        ArithVec b(in.x.size());
        return multiplexer(c, in.x, in.y, b);
    });
    CHECK(chi_square(mres.p0(), 64) < 37.697);

    auto sres = run_op(kCfg, 29, i0, i1, [](ProtocolContext& c, const In& in) {
        return most_significant_bit(c, in.x);
    });
    CHECK(chi_square(sres.p0(), 64) < 37.697);
}

TEST_CASE("MUX helper messages match the mask formulas") {
    // With the transcript captured and the common coin replayed, the four
    // helper-bound values must equal b0+r0, (x0-y0)+r3, (x1-y1)+r1, b1+r2.
    const u64 seed = 28;
    const Ring ring = kCfg.ring();
    std::mt19937_64 rng(29);
    std::vector<u64> x{encode(4.25, kCfg)}, y{encode(-1.0, kCfg)}, b{1};
    auto [x0, x1] = make_shares(x, ring, rng);
    auto [y0, y1] = make_shares(y, ring, rng);
    auto [b0, b1] = make_shares(b, ring, rng);

    struct In {
        ArithVec x, y, b;
        size_t size() const { return x.size(); }
        explicit In(size_t n = 0) : x(n), y(n), b(n) {}
        In(ArithVec xv, ArithVec yv, ArithVec bv)
            : x(std::move(xv)), y(std::move(yv)), b(std::move(bv)) {}
    };
    In i0{x0, y0, b0}, i1{x1, y1, b1};
    auto res = run_op(kCfg, seed, i0, i1,
                      [](ProtocolContext& ctx, const In& in) {
                          return multiplexer(ctx, in.x, in.y, in.b);
                      },
                      /*record_transcript=*/true);

    // Replay the coin: its seed is P0's first RNG draw during session setup.
    u64 coin_seed = RngSource::seeded(mix_seed(seed, 0))();
    CommonCoin coin(coin_seed);
    std::array<u64, 4> r{};
    for (auto& v : r) v = coin.ring_element(ring);

    u64 m2 = ring.add(b0[0].v, r[0]);
    u64 m3 = ring.add(ring.sub(x0[0].v, y0[0].v), r[3]);
    u64 m5 = ring.add(ring.sub(x1[0].v, y1[0].v), r[1]);
    u64 m6 = ring.add(b1[0].v, r[2]);

    bool saw_p0 = false, saw_p1 = false;
    for (const auto& rec : res.transcript->records) {
        if (rec.label != "MUX" || rec.to != PartyRole::Helper) continue;
        ByteReader rd(rec.payload);
        if (rec.from == PartyRole::Proxy0) {
            CHECK(rd.get_u64() == m2);
            CHECK(rd.get_u64() == m3);
            saw_p0 = true;
        } else {
            CHECK(rd.get_u64() == m5);
            CHECK(rd.get_u64() == m6);
            saw_p1 = true;
        }
    }
    CHECK(saw_p0);
    CHECK(saw_p1);

    // And the protocol still selected y (b = 1).
    CHECK(recon(res.p0(), res.p1(), ring)[0] == y[0]);
}
