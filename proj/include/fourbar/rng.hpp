#pragma once

#include <array>
#include <cstdint>

namespace fourbar {

// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
// bit-identical for a given seed regardless of the standard library build.
class Rng {
  public:
    using state_type = std::array<std::uint64_t, 4>;

    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    const state_type& state() const { return s_; }
    void set_state(const state_type& s) { s_ = s; }

    // Derive an independent stream for a sub-task without disturbing this one.
    static Rng derive(std::uint64_t seed, std::uint64_t stream_tag) {
        std::uint64_t x = seed;
        std::uint64_t a = splitmix64(x);
        x = seed ^ (0x9e3779b97f4a7c15ULL * (stream_tag + 1));
        std::uint64_t b = splitmix64(x);
        Rng r;
        r.s_ = {a, b, splitmix64(x), splitmix64(x)};
        return r;
    }

  private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    state_type s_{};
};

} // namespace fourbar
