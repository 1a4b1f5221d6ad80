#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include "mpc3/trio.hpp"

using namespace mpc3;

TEST_CASE("in-process trio forms three usable channel pairs") {
    auto mesh = make_inproc_mesh(99);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            if (a == b) continue;
            Bytes msg{static_cast<u8>(a), static_cast<u8>(b)};
            mesh[a].peer(static_cast<PartyRole>(b)).send_bytes(msg);
            CHECK(mesh[b].peer(static_cast<PartyRole>(a)).recv_bytes() == msg);
        }
}

TEST_CASE("frame header round trip") {
    Bytes h = frame_header(0x1122334455667788ULL, 42, 7);
    REQUIRE(h.size() == kFrameHeaderSize);
    FrameHeader fh = parse_frame_header(h);
    CHECK(fh.session == 0x1122334455667788ULL);
    CHECK(fh.sequence == 42);
    CHECK(fh.payload_len == 7);

    h[0] ^= 0xFF; // corrupt magic
    CHECK_THROWS_AS(parse_frame_header(h), TransportError);
}

TEST_CASE("zero-length and large payloads round trip") {
    auto mesh = make_inproc_mesh(1);
    auto& a = mesh[0].peer(PartyRole::Proxy1);
    auto& b = mesh[1].peer(PartyRole::Proxy0);

    a.send_bytes({});
    CHECK(b.recv_bytes().empty());

    Bytes big(10 * 1024 * 1024);
    for (size_t i = 0; i < big.size(); ++i) big[i] = static_cast<u8>(i * 2654435761u >> 13);
    a.send_bytes(big);
    CHECK(b.recv_bytes() == big);
}

TEST_CASE("delivery order equals send order under interleaving") {
    auto mesh = make_inproc_mesh(2);
    constexpr int kMessages = 2000;

    std::thread sender([&] {
        std::mt19937_64 rng(3);
        for (int i = 0; i < kMessages; ++i) {
            Bytes b;
            put_u32(b, static_cast<u32>(i));
            mesh[2].peer(PartyRole::Proxy0).send_bytes(b);
            if (rng() % 7 == 0) std::this_thread::yield();
        }
    });

    bool ordered = true;
    for (int i = 0; i < kMessages; ++i) {
        Bytes b = mesh[0].peer(PartyRole::Helper).recv_bytes();
        ByteReader r(b);
        if (r.get_u32() != static_cast<u32>(i)) ordered = false;
    }
    sender.join();
    CHECK(ordered);
}

TEST_CASE("meter counts exactly one round per barrier") {
    TrioOptions opt;
    opt.seed = 17;
    constexpr int kBarriers = 9;

    auto result = run_trio(opt, [](ProtocolContext& ctx) -> int {
        auto scope = ctx.meter.scope("scripted");
        if (!ctx.is_proxy()) return 0;
        for (int i = 0; i < kBarriers; ++i) {
            Bytes payload;
            put_u32(payload, static_cast<u32>(i));
            ctx.exchange_with_twin(payload);
        }
        return 1;
    });

    CHECK(result.meters[0].stats().at("scripted").rounds == kBarriers);
    CHECK(result.meters[1].stats().at("scripted").rounds == kBarriers);
    CHECK(result.meters[0].total_rounds() == kBarriers);
}

TEST_CASE("meter byte accounting includes frame headers") {
    TrioOptions opt;
    opt.seed = 18;
    auto result = run_trio(opt, [](ProtocolContext& ctx) -> int {
        auto scope = ctx.meter.scope("bytes");
        if (ctx.role == PartyRole::Proxy0) {
            ctx.send_to(PartyRole::Proxy1, Bytes(100));
        } else if (ctx.role == PartyRole::Proxy1) {
            ctx.recv_from(PartyRole::Proxy0);
        }
        return 0;
    });
    CHECK(result.meters[0].stats().at("bytes").bytes_sent == 100 + kFrameHeaderSize);
}

TEST_CASE("a throwing party unblocks the others") {
    TrioOptions opt;
    opt.seed = 19;
    CHECK_THROWS_AS(run_trio(opt, [](ProtocolContext& ctx) -> int {
                        if (ctx.role == PartyRole::Helper)
                            throw ProtocolAbort("helper gave up");
                        if (ctx.is_proxy()) ctx.recv_from(PartyRole::Helper);
                        return 0;
                    }),
                    ProtocolAbort);
}

TEST_CASE("transcript records labeled frames") {
    TrioOptions opt;
    opt.seed = 20;
    opt.record_transcript = true;
    auto result = run_trio(opt, [](ProtocolContext& ctx) -> int {
        auto scope = ctx.meter.scope("labeled-op");
        if (ctx.role == PartyRole::Proxy0) ctx.send_to(PartyRole::Helper, Bytes{1, 2, 3});
        if (ctx.role == PartyRole::Helper) ctx.recv_from(PartyRole::Proxy0);
        return 0;
    });
    bool found = false;
    for (const auto& rec : result.transcript->records)
        if (rec.label == "labeled-op" && rec.to == PartyRole::Helper && rec.payload.size() == 3)
            found = true;
    CHECK(found);
}
