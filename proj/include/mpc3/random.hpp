#pragma once

#include <numeric>
#include <random>

#include "mpc3/ring.hpp"

namespace mpc3 {

// Party-local randomness. Deterministic mode (seeded mt19937_64) is for
// tests and the in-process CLI; socket mode should construct with
// RngSource::system() so dealer draws come from the OS entropy pool.
class RngSource {
  public:
    static RngSource seeded(u64 seed) { return RngSource(seed, true); }

    static RngSource system() {
        std::random_device rd;
        u64 seed = (static_cast<u64>(rd()) << 32) ^ rd();
        return RngSource(seed, false);
    }

    u64 operator()() { return gen_(); }

    u64 ring_element(const Ring& r) { return gen_() & r.mask; }

    bool deterministic() const { return deterministic_; }

  private:
    RngSource(u64 seed, bool det) : gen_(seed), deterministic_(det) {}

    std::mt19937_64 gen_;
    bool deterministic_;
};

inline u64 mix_seed(u64 seed, u64 salt) {
    // splitmix64 step
    u64 z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed-synchronized generator shared by the two proxies. Both draw identical
// streams; the helper never learns the seed. The draw counter lets the
// proxies detect desynchronization after a run.
class CommonCoin {
  public:
    CommonCoin() : gen_(0) {}
    explicit CommonCoin(u64 seed) : gen_(seed) {}

    u8 bit() {
        ++draws_;
        return static_cast<u8>(gen_() & 1);
    }

    u64 ring_element(const Ring& r) {
        ++draws_;
        return gen_() & r.mask;
    }

    // Uniform in [1, 67).
    u8 nonzero_field_element() {
        ++draws_;
        return static_cast<u8>(1 + gen_() % (kBitField - 1));
    }

    std::vector<u32> permutation(u32 n) {
        ++draws_;
        std::vector<u32> p(n);
        std::iota(p.begin(), p.end(), 0);
        for (u32 i = n; i > 1; --i) {
            u32 j = static_cast<u32>(gen_() % i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    double uniform_real(double lo, double hi) {
        ++draws_;
        double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    u64 draw_count() const { return draws_; }

    void check_synchronized(u64 peer_draws) const {
        if (peer_draws != draws_)
            throw UsageError("common coin desynchronized: " + std::to_string(draws_) +
                             " local draws vs " + std::to_string(peer_draws));
    }

  private:
    std::mt19937_64 gen_;
    u64 draws_ = 0;
};

} // namespace mpc3
