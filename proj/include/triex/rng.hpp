#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace triex {

// xoshiro256++ with splitmix64 seeding. Every consumer owns its own stream;
// substreams are derived by hashing a (master seed, path) tuple so that
// replications are reproducible independent of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    static Rng substream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = master;
        for (std::uint64_t tag : path) {
            std::uint64_t x = h ^ (tag + 0x9e3779b97f4a7c15ULL);
            h = splitmix64(x);
        }
        return Rng(h);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in (0,1); never returns 0 so log() is safe
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n);

    bool coin() { return (next_u64() >> 63) != 0; }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace triex
