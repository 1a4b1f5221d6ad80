#pragma once

#include <cstring>
#include <vector>

#include "mpc3/ring.hpp"

namespace mpc3 {

using Bytes = std::vector<u8>;

// Canonical byte layout: little-endian fixed-width integers; field-bit
// shares as one byte per position.

inline void put_u32(Bytes& out, u32 v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<u8>(v >> (8 * i)));
}

inline void put_u64(Bytes& out, u64 v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<u8>(v >> (8 * i)));
}

struct ByteReader {
    const Bytes& buf;
    size_t pos = 0;

    explicit ByteReader(const Bytes& b) : buf(b) {}

    u32 get_u32() {
        if (pos + 4 > buf.size()) throw TransportError("frame underrun (u32)");
        u32 v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<u32>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }

    u64 get_u64() {
        if (pos + 8 > buf.size()) throw TransportError("frame underrun (u64)");
        u64 v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<u64>(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }

    u8 get_u8() {
        if (pos >= buf.size()) throw TransportError("frame underrun (u8)");
        return buf[pos++];
    }

    void get_raw(u8* dst, size_t len) {
        if (pos + len > buf.size()) throw TransportError("frame underrun (raw)");
        std::memcpy(dst, buf.data() + pos, len);
        pos += len;
    }

    bool done() const { return pos == buf.size(); }
};

inline void put_u64s(Bytes& out, const u64* v, size_t count) {
    out.reserve(out.size() + count * 8);
    for (size_t i = 0; i < count; ++i) put_u64(out, v[i]);
}

inline Bytes pack_shares(const ArithVec& v) {
    Bytes out;
    out.reserve(v.size() * 8);
    for (const auto& s : v) put_u64(out, s.v);
    return out;
}

inline ArithVec unpack_shares(const Bytes& b) {
    if (b.size() % 8 != 0) throw TransportError("share payload not a multiple of 8");
    ArithVec v(b.size() / 8);
    ByteReader r(b);
    for (auto& s : v) s.v = r.get_u64();
    return v;
}

// Wire frame: 4-byte magic, 8-byte session id, 8-byte sequence number,
// 4-byte payload length, payload. Delivery order within a session equals
// send order; the sequence number is verified on receipt.
inline constexpr u32 kFrameMagic = 0x4D504333; // "MPC3"
inline constexpr size_t kFrameHeaderSize = 24;

inline Bytes frame_header(u64 session, u64 sequence, u32 payload_len) {
    Bytes h;
    h.reserve(kFrameHeaderSize);
    put_u32(h, kFrameMagic);
    put_u64(h, session);
    put_u64(h, sequence);
    put_u32(h, payload_len);
    return h;
}

struct FrameHeader {
    u64 session;
    u64 sequence;
    u32 payload_len;
};

inline FrameHeader parse_frame_header(const Bytes& h) {
    ByteReader r(h);
    if (r.get_u32() != kFrameMagic) throw TransportError("bad frame magic");
    FrameHeader fh;
    fh.session = r.get_u64();
    fh.sequence = r.get_u64();
    fh.payload_len = r.get_u32();
    return fh;
}

} // namespace mpc3
