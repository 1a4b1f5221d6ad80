#pragma once

#include "mpc3/correlated.hpp"
#include "mpc3/random.hpp"
#include "mpc3/transport.hpp"

namespace mpc3 {

// Per-party, per-session protocol state. One context serves one session on
// one logical thread; vector ops parallelize inside a call, never across
// concurrent calls on the same context.
struct ProtocolContext {
    PartyRole role;
    FixedPointConfig cfg;
    ChannelSet channels;
    Meter meter;
    RngSource rng;
    CommonCoin coin; // proxies only; seeded during session setup
    Transcript* transcript = nullptr;

    // Pre-dealt material (offline mode). When empty and online_dealing is
    // set, the helper deals inside each protocol invocation.
    bool online_dealing = true;
    TripleStream triples;
    MocStream conversion_randomness;
    MocStream sign_randomness;
    WrapStream wrap_records; // helper side, aligned with sign_randomness

    ProtocolContext(PartyRole r, const FixedPointConfig& c, RngSource prng)
        : role(r), cfg(c), rng(std::move(prng)) {}

    bool is_proxy() const { return role != PartyRole::Helper; }
    int party_index() const { return role_index(role); } // 0 or 1 for proxies

    PartyRole other_proxy() const {
        if (!is_proxy()) throw UsageError("helper has no proxy twin");
        return role == PartyRole::Proxy0 ? PartyRole::Proxy1 : PartyRole::Proxy0;
    }

    void send_to(PartyRole peer, const Bytes& payload) {
        channels.peer(peer).send_bytes(payload);
        meter.add_bytes(kFrameHeaderSize + payload.size());
        if (transcript) transcript->add(role, peer, meter.current_label(), payload);
    }

    Bytes recv_from(PartyRole peer) { return channels.peer(peer).recv_bytes(); }

    // Bidirectional swap with the other proxy; counts one round.
    Bytes exchange_with_twin(const Bytes& payload) {
        PartyRole twin = other_proxy();
        send_to(twin, payload);
        Bytes got = recv_from(twin);
        meter.round();
        return got;
    }
};

// Establishes the proxy-to-proxy common coin. The seed travels over the
// P0-P1 link only; the helper is excluded from the exchange.
inline void session_setup(ProtocolContext& ctx) {
    if (ctx.role == PartyRole::Proxy0) {
        u64 seed = ctx.rng();
        Bytes b;
        put_u64(b, seed);
        ctx.send_to(PartyRole::Proxy1, b);
        ctx.coin = CommonCoin(seed);
    } else if (ctx.role == PartyRole::Proxy1) {
        Bytes b = ctx.recv_from(PartyRole::Proxy0);
        ByteReader r(b);
        ctx.coin = CommonCoin(r.get_u64());
    }
}

// End-of-session coin synchronization check between the proxies.
inline void verify_coin_sync(ProtocolContext& ctx) {
    if (!ctx.is_proxy()) return;
    Bytes mine;
    put_u64(mine, ctx.coin.draw_count());
    Bytes theirs = ctx.exchange_with_twin(mine);
    ByteReader r(theirs);
    ctx.coin.check_synchronized(r.get_u64());
}

} // namespace mpc3
