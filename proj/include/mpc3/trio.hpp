#pragma once

#include <functional>
#include <thread>
#include <type_traits>

#include "mpc3/context.hpp"

namespace mpc3 {

struct TrioOptions {
    FixedPointConfig cfg{};
    u64 seed = 1;
    bool record_transcript = false;
    bool deterministic = true; // seeded RNGs; system entropy otherwise
};

template <class R>
struct TrioResult {
    std::array<R, 3> values;
    std::array<Meter, 3> meters;
    std::shared_ptr<Transcript> transcript;

    const R& p0() const { return values[0]; }
    const R& p1() const { return values[1]; }
};

// Runs one session with all three parties in-process, one thread per party.
// `fn(ctx)` is the same body for every role; protocols dispatch on ctx.role.
// The first exception wins; the throwing party shuts its channels down so
// the other two unblock.
template <class Fn>
auto run_trio(const TrioOptions& opt, Fn fn)
    -> TrioResult<std::invoke_result_t<Fn&, ProtocolContext&>> {
    using R = std::invoke_result_t<Fn&, ProtocolContext&>;
    static_assert(!std::is_void_v<R>, "party function must return a value");

    auto mesh = make_inproc_mesh(opt.seed);
    auto transcript = opt.record_transcript ? std::make_shared<Transcript>() : nullptr;

    std::array<std::unique_ptr<ProtocolContext>, 3> ctxs;
    for (int i = 0; i < 3; ++i) {
        auto rng = opt.deterministic ? RngSource::seeded(mix_seed(opt.seed, static_cast<u64>(i)))
                                     : RngSource::system();
        ctxs[i] = std::make_unique<ProtocolContext>(static_cast<PartyRole>(i), opt.cfg,
                                                    std::move(rng));
        ctxs[i]->channels = mesh[i];
        ctxs[i]->transcript = transcript.get();
    }

    std::array<R, 3> values{};
    std::array<std::exception_ptr, 3> errors{};
    std::array<std::thread, 3> threads;

    for (int i = 0; i < 3; ++i) {
        threads[i] = std::thread([&, i] {
            try {
                session_setup(*ctxs[i]);
                values[i] = fn(*ctxs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
                for (auto& ch : ctxs[i]->channels.to)
                    if (ch) ch->shutdown();
            }
        });
    }
    for (auto& t : threads) t.join();

    // Report the root cause: a protocol abort beats the transport errors it
    // causes on the other parties.
    for (auto& e : errors) {
        if (!e) continue;
        try {
            std::rethrow_exception(e);
        } catch (const TransportError&) {
            continue;
        } catch (...) {
            std::rethrow_exception(e);
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    TrioResult<R> out{std::move(values), {}, transcript};
    for (int i = 0; i < 3; ++i) out.meters[i] = std::move(ctxs[i]->meter);
    return out;
}

} // namespace mpc3
