#pragma once

#include <cstdint>
#include <random>

namespace bats {

/// splitmix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    return mix_seed(mix_seed(base) ^ mix_seed(tag + 0x5851F42D4C957F2DULL));
}

/// Seeded generator. The engine is fully specified by the standard and the
/// helpers below avoid the implementation-defined std distributions, so a
/// seed reproduces the same stream on any toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(mix_seed(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform on [0, n), n > 0. Rejection sampling, unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    std::uint8_t byte() { return static_cast<std::uint8_t>(engine_() >> 56); }

    std::uint8_t nonzero_byte() {
        std::uint8_t b;
        do {
            b = byte();
        } while (b == 0);
        return b;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace bats
