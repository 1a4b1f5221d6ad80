#pragma once

#include <cassert>
#include <random>
#include <vector>

#include "mpc3/common.hpp"

namespace mpc3 {

// Power-of-two ring Z_{2^bits} for 1 <= bits <= 64, backed by u64 with a
// mask. bits == 64 uses native machine wrapping (mask is all-ones).
struct Ring {
    unsigned bits = 64;
    u64 mask = ~0ULL;

    Ring() = default;
    explicit Ring(unsigned n_bits)
        : bits(n_bits), mask(n_bits == 64 ? ~0ULL : ((1ULL << n_bits) - 1ULL)) {
        assert(n_bits >= 1 && n_bits <= 64);
    }

    u64 reduce(u64 a) const { return a & mask; }
    u64 add(u64 a, u64 b) const { return (a + b) & mask; }
    u64 sub(u64 a, u64 b) const { return (a - b) & mask; }
    u64 mul(u64 a, u64 b) const { return (a * b) & mask; }
    u64 neg(u64 a) const { return (0 - a) & mask; }

    bool operator==(const Ring& o) const { return bits == o.bits; }
    bool operator!=(const Ring& o) const { return bits != o.bits; }
};

// 1 iff a + b wraps past the ring size, i.e. a + b >= 2^bits.
inline u64 is_wrap(u64 a, u64 b, const Ring& ring) {
    assert(a <= ring.mask && b <= ring.mask);
    return a > ring.mask - b ? 1 : 0;
}

// Share kinds. ArithShare lives in Z_{2^n}, HalfShare in Z_{2^{n-1}}.
// The two are distinct types so a half-ring share cannot silently flow
// into full-ring arithmetic.
struct ArithShare {
    u64 v = 0;
};

struct HalfShare {
    u64 v = 0;
};

// XOR share of a single bit.
struct BoolShare {
    u8 bit = 0;
};

// Prime field used for the bitwise comparison protocol.
inline constexpr u32 kBitField = 67;

inline u8 f67_add(u32 a, u32 b) { return static_cast<u8>((a + b) % kBitField); }
inline u8 f67_sub(u32 a, u32 b) { return static_cast<u8>((a + kBitField - b % kBitField) % kBitField); }
inline u8 f67_mul(u32 a, u32 b) { return static_cast<u8>((a * b) % kBitField); }

// Per-bit additive shares over Z_67: bits[j] is one share of the j-th bit
// (j = 0 is the least significant), each in [0, 67).
struct FieldBitShares {
    std::vector<u8> bits;
};

using ArithVec = std::vector<ArithShare>;
using HalfVec = std::vector<HalfShare>;

// --- 2-out-of-2 splitting and reconstruction -------------------------------

template <class Rng>
inline std::pair<u64, u64> split(u64 x, const Ring& ring, Rng& rng) {
    u64 s0 = rng() & ring.mask;
    return {s0, ring.sub(x, s0)};
}

inline u64 reconstruct(u64 s0, u64 s1, const Ring& ring) { return ring.add(s0, s1); }

inline u64 reconstruct(ArithShare s0, ArithShare s1, const Ring& ring) {
    return ring.add(s0.v, s1.v);
}
inline u64 reconstruct(HalfShare s0, HalfShare s1, const Ring& half) {
    return half.add(s0.v, s1.v);
}

template <class Rng>
inline std::pair<FieldBitShares, FieldBitShares> split_bits(u64 x, unsigned nbits, Rng& rng) {
    FieldBitShares a, b;
    a.bits.resize(nbits);
    b.bits.resize(nbits);
    for (unsigned j = 0; j < nbits; ++j) {
        u8 bit = static_cast<u8>((x >> j) & 1);
        u8 s0 = static_cast<u8>(rng() % kBitField);
        a.bits[j] = s0;
        b.bits[j] = f67_sub(bit, s0);
    }
    return {a, b};
}

inline u64 reconstruct_bits(const FieldBitShares& a, const FieldBitShares& b) {
    assert(a.bits.size() == b.bits.size());
    u64 x = 0;
    for (unsigned j = 0; j < a.bits.size(); ++j) {
        u8 bit = f67_add(a.bits[j], b.bits[j]);
        assert(bit <= 1);
        x |= static_cast<u64>(bit) << j;
    }
    return x;
}

// --- Local share algebra (communication-free) ------------------------------

inline ArithShare add_local(ArithShare a, ArithShare b, const Ring& r) {
    return {r.add(a.v, b.v)};
}
inline ArithShare sub_local(ArithShare a, ArithShare b, const Ring& r) {
    return {r.sub(a.v, b.v)};
}
inline ArithShare neg_local(ArithShare a, const Ring& r) { return {r.neg(a.v)}; }

// Adds a public constant; by convention only party 0 applies it.
inline ArithShare add_public(ArithShare a, u64 pub, int party, const Ring& r) {
    return party == 0 ? ArithShare{r.add(a.v, pub)} : a;
}

// Multiplies by a public constant. If the constant is a fixed-point code the
// result carries a doubled fraction and each party must truncate_share it.
inline ArithShare scale_by_public(ArithShare a, u64 pub, const Ring& r) {
    return {r.mul(a.v, pub)};
}

inline ArithVec add_local(const ArithVec& a, const ArithVec& b, const Ring& r) {
    if (a.size() != b.size()) throw UsageError("add_local: length mismatch");
    ArithVec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = add_local(a[i], b[i], r);
    return out;
}

inline ArithVec sub_local(const ArithVec& a, const ArithVec& b, const Ring& r) {
    if (a.size() != b.size()) throw UsageError("sub_local: length mismatch");
    ArithVec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = sub_local(a[i], b[i], r);
    return out;
}

inline ArithVec neg_local(const ArithVec& a, const Ring& r) {
    ArithVec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = neg_local(a[i], r);
    return out;
}

inline ArithVec scale_by_public(const ArithVec& a, u64 pub, const Ring& r) {
    ArithVec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = scale_by_public(a[i], pub, r);
    return out;
}

} // namespace mpc3
