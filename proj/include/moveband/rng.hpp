#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace moveband {

// Deterministic seeded randomness with labeled stream splitting: one root
// seed, independent streams derived per (label, index). The derived seed is a
// splitmix64 hash of the root seed and the label, so streams for different
// purposes never alias.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed == 0 ? 0x9e3779b97f4a7c15ull : seed) {}

    static std::uint64_t split_seed(std::uint64_t root, std::string_view label,
                                    std::uint64_t index = 0) {
        std::uint64_t h = root ^ 0xcbf29ce484222325ull;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        h ^= index + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return splitmix64(h);
    }

    static Rng derive(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
        return Rng(split_seed(root, label, index));
    }

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in {0, ..., n-1}, n >= 1
    std::uint64_t uniform_below(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // +1 or -1 with equal probability
    int sign() { return (next_u64() & 1) ? +1 : -1; }

    // stateless hash-based uniform in [0, 1), for oblivious loss tables
    static double hash01(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        std::uint64_t h = splitmix64(seed + 0x632be59bd9b4e019ull);
        h = splitmix64(h ^ a);
        h = splitmix64(h ^ b);
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace moveband
