#pragma once

#include <fstream>

#include "mpc3/fixed_point.hpp"
#include "mpc3/random.hpp"
#include "mpc3/wire.hpp"

namespace mpc3 {

// Correlated material dealt by the helper. Streams are consumed strictly
// forward, so an item can never be used twice; take() past the dealt count
// raises UsageError.

// One party's slice of a multiplication triple: c = a * b mod 2^n.
struct BeaverTriple {
    u64 a = 0, b = 0, c = 0;
};

// One party's slice of the ring-conversion randomness for a mask r drawn
// in the half ring: an additive share of r over 2^{n-1}, per-bit field
// shares of r, and (when dealt for standalone conversion) a boolean share
// of isWrap(r0, r1, 2^{n-1}).
struct MocRandomness {
    HalfShare r_half;
    FieldBitShares r_bits;
    BoolShare w_bool;
};

// Helper-retained record per dealt mask: the wrap bit of the r-share pair.
struct DealerWrapRecord {
    u8 w = 0;
};

template <class T>
class Stream {
  public:
    void append(T item) { items_.push_back(std::move(item)); }

    const T& take() {
        if (next_ >= items_.size())
            throw UsageError("correlated stream exhausted (dealt " +
                             std::to_string(items_.size()) + ", requested more)");
        return items_[next_++];
    }

    size_t remaining() const { return items_.size() - next_; }
    size_t dealt() const { return items_.size(); }

  private:
    std::vector<T> items_;
    size_t next_ = 0;
};

using TripleStream = Stream<BeaverTriple>;
using MocStream = Stream<MocRandomness>;
using WrapStream = Stream<DealerWrapRecord>;

// --- Dealing (helper side) ---------------------------------------------------

// Generates `count` triples; out0/out1 receive the per-proxy slices.
template <class Rng>
inline void generate_triples(size_t count, const Ring& ring, Rng& rng,
                             std::vector<BeaverTriple>& out0, std::vector<BeaverTriple>& out1) {
    out0.resize(count);
    out1.resize(count);
    for (size_t i = 0; i < count; ++i) {
        u64 a = rng() & ring.mask;
        u64 b = rng() & ring.mask;
        u64 c = ring.mul(a, b);
        auto [a0, a1] = split(a, ring, rng);
        auto [b0, b1] = split(b, ring, rng);
        auto [c0, c1] = split(c, ring, rng);
        out0[i] = {a0, b0, c0};
        out1[i] = {a1, b1, c1};
    }
}

// Generates `count` masks r in the half ring with bit decompositions over
// Z_67 and wrap bits. `nbits` is the bit length of the half ring (n-1).
// When share_wrap is set the wrap bit is split into boolean shares for the
// proxies (ring conversion); otherwise the helper keeps it (sign extraction).
template <class Rng>
inline void generate_moc_randomness(size_t count, const Ring& half, unsigned nbits, bool share_wrap,
                                    Rng& rng, std::vector<MocRandomness>& out0,
                                    std::vector<MocRandomness>& out1,
                                    std::vector<DealerWrapRecord>& kept) {
    out0.resize(count);
    out1.resize(count);
    kept.resize(count);
    for (size_t i = 0; i < count; ++i) {
        u64 r = rng() & half.mask;
        auto [r0, r1] = split(r, half, rng);
        auto [bits0, bits1] = split_bits(r, nbits, rng);
        u8 w = static_cast<u8>(is_wrap(r0, r1, half));
        kept[i].w = w;
        u8 w0 = 0, w1 = 0;
        if (share_wrap) {
            w0 = static_cast<u8>(rng() & 1);
            w1 = w ^ w0;
        }
        out0[i] = {HalfShare{r0}, std::move(bits0), BoolShare{w0}};
        out1[i] = {HalfShare{r1}, std::move(bits1), BoolShare{w1}};
    }
}

// --- Serialization: correlated-material files --------------------------------
//
// Header: magic, n, dec, kind, count; then canonical little-endian items.

enum class MaterialKind : u32 { Triples = 1, RingConversion = 2, SignExtraction = 3 };

inline constexpr u32 kMaterialMagic = 0x33525243; // "CRR3"

inline Bytes serialize_triples(const std::vector<BeaverTriple>& v, const FixedPointConfig& cfg) {
    Bytes out;
    put_u32(out, kMaterialMagic);
    put_u32(out, cfg.n);
    put_u32(out, cfg.dec);
    put_u32(out, static_cast<u32>(MaterialKind::Triples));
    put_u64(out, v.size());
    for (const auto& t : v) {
        put_u64(out, t.a);
        put_u64(out, t.b);
        put_u64(out, t.c);
    }
    return out;
}

inline std::vector<BeaverTriple> deserialize_triples(const Bytes& b, const FixedPointConfig& cfg) {
    ByteReader r(b);
    if (r.get_u32() != kMaterialMagic) throw UsageError("bad material magic");
    if (r.get_u32() != cfg.n || r.get_u32() != cfg.dec)
        throw UsageError("material was dealt for a different number format");
    if (r.get_u32() != static_cast<u32>(MaterialKind::Triples))
        throw UsageError("material kind is not triples");
    std::vector<BeaverTriple> v(r.get_u64());
    for (auto& t : v) {
        t.a = r.get_u64();
        t.b = r.get_u64();
        t.c = r.get_u64();
    }
    return v;
}

inline Bytes serialize_moc(const std::vector<MocRandomness>& v, const FixedPointConfig& cfg,
                           MaterialKind kind) {
    Bytes out;
    put_u32(out, kMaterialMagic);
    put_u32(out, cfg.n);
    put_u32(out, cfg.dec);
    put_u32(out, static_cast<u32>(kind));
    put_u64(out, v.size());
    for (const auto& m : v) {
        put_u64(out, m.r_half.v);
        put_u32(out, static_cast<u32>(m.r_bits.bits.size()));
        for (u8 bit : m.r_bits.bits) out.push_back(bit);
        out.push_back(m.w_bool.bit);
    }
    return out;
}

inline std::vector<MocRandomness> deserialize_moc(const Bytes& b, const FixedPointConfig& cfg,
                                                  MaterialKind kind) {
    ByteReader r(b);
    if (r.get_u32() != kMaterialMagic) throw UsageError("bad material magic");
    if (r.get_u32() != cfg.n || r.get_u32() != cfg.dec)
        throw UsageError("material was dealt for a different number format");
    if (r.get_u32() != static_cast<u32>(kind)) throw UsageError("unexpected material kind");
    std::vector<MocRandomness> v(r.get_u64());
    for (auto& m : v) {
        m.r_half.v = r.get_u64();
        m.r_bits.bits.resize(r.get_u32());
        for (auto& bit : m.r_bits.bits) bit = r.get_u8();
        m.w_bool.bit = r.get_u8();
    }
    return v;
}

inline void write_file(const std::string& path, const Bytes& data) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

inline Bytes read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open: " + path);
    return Bytes(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

} // namespace mpc3
