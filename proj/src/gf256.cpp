#include "bats/gf256.hpp"

#include <algorithm>
#include <cassert>

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#include <immintrin.h>
#define BATS_GF_AVX2 1
#endif

namespace bats::gf {

namespace {

std::array<std::array<std::uint8_t, 256>, 256> build_mul_table() {
    std::array<std::array<std::uint8_t, 256>, 256> t{};
    for (int a = 0; a < 256; ++a)
        for (int b = 0; b < 256; ++b)
            t[a][b] = mul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
    return t;
}

// Products of c with every low nibble and every high nibble, for pshufb.
struct NibbleTables {
    alignas(32) std::array<std::array<std::uint8_t, 32>, 256> lo{};
    alignas(32) std::array<std::array<std::uint8_t, 32>, 256> hi{};
};

const NibbleTables& nibble_tables() {
    static const NibbleTables t = [] {
        NibbleTables n;
        for (int c = 0; c < 256; ++c)
            for (int x = 0; x < 16; ++x) {
                const auto cc = static_cast<std::uint8_t>(c);
                n.lo[c][x] = n.lo[c][x + 16] = mul(cc, static_cast<std::uint8_t>(x));
                n.hi[c][x] = n.hi[c][x + 16] = mul(cc, static_cast<std::uint8_t>(x << 4));
            }
        return n;
    }();
    return t;
}

#ifdef BATS_GF_AVX2
__attribute__((target("avx2"))) std::size_t axpy_avx2(std::uint8_t* dst, const std::uint8_t* src, std::size_t n,
                                                     std::uint8_t c) {
    const auto& t = nibble_tables();
    const __m256i lo = _mm256_load_si256(reinterpret_cast<const __m256i*>(t.lo[c].data()));
    const __m256i hi = _mm256_load_si256(reinterpret_cast<const __m256i*>(t.hi[c].data()));
    const __m256i mask = _mm256_set1_epi8(0x0F);
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        const __m256i pl = _mm256_shuffle_epi8(lo, _mm256_and_si256(s, mask));
        const __m256i ph = _mm256_shuffle_epi8(hi, _mm256_and_si256(_mm256_srli_epi64(s, 4), mask));
        __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        d = _mm256_xor_si256(d, _mm256_xor_si256(pl, ph));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), d);
    }
    return i;
}

bool has_avx2() {
    static const bool ok = __builtin_cpu_supports("avx2");
    return ok;
}
#endif

}  // namespace

const std::array<std::array<std::uint8_t, 256>, 256>& mul_table() {
    static const auto table = build_mul_table();
    return table;
}

void axpy(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c) {
    assert(dst.size() == src.size());
    if (c == 0) return;
    if (c == 1) {
        add(dst, src);
        return;
    }
    std::size_t i = 0;
#ifdef BATS_GF_AVX2
    if (dst.size() >= 32 && has_avx2()) i = axpy_avx2(dst.data(), src.data(), dst.size(), c);
#endif
    const auto& row = mul_table()[c];
    for (; i < dst.size(); ++i) dst[i] ^= row[src[i]];
}

void scale(std::span<std::uint8_t> v, std::uint8_t c) {
    if (c == 1) return;
    const auto& row = mul_table()[c];
    for (auto& x : v) x = row[x];
}

void add(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src) {
    assert(dst.size() == src.size());
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
}

bool is_zero(std::span<const std::uint8_t> v) {
    return std::all_of(v.begin(), v.end(), [](std::uint8_t x) { return x == 0; });
}

}  // namespace bats::gf
