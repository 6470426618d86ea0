#pragma once
// Counter-based random streams. Every consumer derives its own stream from a
// (seed, key...) tuple, so results never depend on evaluation order or worker
// count. The generator core is splitmix64; normals use Box-Muller on uniforms
// drawn from the stream.

#include <cstdint>
#include <cmath>
#include <numbers>
#include <string_view>

namespace rrcdsp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// FNV-1a 64-bit, used for manifest content hashes and string-keyed seeds.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xCBF29CE484222325ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Mix an ordered tuple of 64-bit parts into one stream key.
inline std::uint64_t mix_key(std::uint64_t a) {
    std::uint64_t s = a;
    return splitmix64(s);
}
template <typename... Rest>
std::uint64_t mix_key(std::uint64_t a, Rest... rest) {
    std::uint64_t s = mix_key(rest...) ^ (a + 0x9E3779B97F4A7C15ull);
    return splitmix64(s);
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : state_(key) {
        // one warm-up round so a zero key does not start the stream at zero
        splitmix64(state_);
    }

    template <typename... Parts>
    static CounterRng from(std::uint64_t seed, Parts... parts) {
        return CounterRng(mix_key(seed, static_cast<std::uint64_t>(parts)...));
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform draw strictly inside (0, 1); safe as a log() argument.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

} // namespace rrcdsp
