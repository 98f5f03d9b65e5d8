#ifndef TREESTACK_RNG_HPP
#define TREESTACK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace treestack {

// SplitMix64. Small state, passes the usual batteries, and cheap enough for
// the Monte Carlo kernels where the generator is most of the work.
struct Rng {
    std::uint64_t state = 0;

    explicit Rng(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return u01() < p; }

    // Exponential(1).
    double exp1() { return -std::log1p(-u01()); }

    std::uint64_t uniform_index(std::uint64_t n) { return next() % n; }
};

inline std::uint64_t hash_label(std::string_view label) {
    // FNV-1a
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Named sub-stream seeds: every purpose ("init", "clock", "coin", ...) gets
// its own deterministic stream derived from the master seed, so replaying a
// run with only one parameter changed keeps the other streams aligned.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = mix64(master ^ hash_label(label));
    h = mix64(h ^ (a * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ (b * 0xa24baed4963ee407ULL));
    return h;
}

}  // namespace treestack

#endif
