#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace qform {

// splitmix64 step; used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** — fixed, named generator; identical output on every platform.
// Uniform helpers are hand-rolled (no std::uniform_* , whose output is
// implementation-defined) so traces are bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        for (auto& word : s_) word = splitmix64(seed);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // unbiased integer in [0, n), rejection sampling
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = next();
            if (x >= threshold) return x % n;
        }
    }

    std::int64_t int_in(std::int64_t lo, std::int64_t hi) {  // inclusive bounds
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double gaussian() {  // Box-Muller with cached spare
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(6.283185307179586476925287 * u2);
        has_spare_ = true;
        return mag * std::cos(6.283185307179586476925287 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derives an independent child stream from (root seed, purpose tag, index).
// Same triple -> same stream, so parallel runs stay reproducible.
inline std::uint64_t derive_stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index) {
    std::uint64_t h = seed ^ 0xA0761D6478BD642FULL;
    for (char c : purpose) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        splitmix64(h);
    }
    h ^= index * 0xE7037ED1A0B428DBULL;
    std::uint64_t out = splitmix64(h);
    return out ^ splitmix64(h);
}

}  // namespace qform
