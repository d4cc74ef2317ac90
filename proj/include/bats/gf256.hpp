#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>

#include <Eigen/Core>

namespace bats::gf {

/// Reduction polynomial x^8 + x^4 + x^3 + x^2 + 1.
inline constexpr unsigned kPolynomial = 0x11D;

namespace detail {

struct Tables {
    std::array<std::uint8_t, 512> exp{};
    std::array<std::uint8_t, 256> log{};
    std::array<std::uint8_t, 256> inv{};
};

constexpr Tables make_tables() {
    Tables t;
    unsigned x = 1;
    for (int i = 0; i < 255; ++i) {
        t.exp[i] = static_cast<std::uint8_t>(x);
        t.log[x] = static_cast<std::uint8_t>(i);
        x <<= 1;
        if (x & 0x100) x ^= kPolynomial;
    }
    for (int i = 255; i < 512; ++i) t.exp[i] = t.exp[i - 255];
    for (int a = 1; a < 256; ++a) t.inv[a] = t.exp[255 - t.log[a]];
    return t;
}

inline constexpr Tables kTables = make_tables();

}  // namespace detail

constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
    if (a == 0 || b == 0) return 0;
    return detail::kTables.exp[detail::kTables.log[a] + detail::kTables.log[b]];
}

/// Multiplicative inverse; inv(0) is 0 by convention and never used as a pivot.
constexpr std::uint8_t inv(std::uint8_t a) { return detail::kTables.inv[a]; }

constexpr std::uint8_t div(std::uint8_t a, std::uint8_t b) { return mul(a, inv(b)); }

/// Full 64 KiB product table, row c holds c*x for every x. Used by the vector kernels.
const std::array<std::array<std::uint8_t, 256>, 256>& mul_table();

// Byte-vector kernels. All spans must have equal length where two are given.

/// dst ^= c * src
void axpy(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c);
/// v *= c
void scale(std::span<std::uint8_t> v, std::uint8_t c);
void add(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src);
bool is_zero(std::span<const std::uint8_t> v);

/// Element of GF(2^8). Standard-layout wrapper over one byte so that
/// Eigen matrices of Gf256 share storage layout with plain byte buffers.
class Gf256 {
public:
    constexpr Gf256() = default;
    constexpr explicit Gf256(int v) : v_(static_cast<std::uint8_t>(v)) {}

    constexpr std::uint8_t value() const { return v_; }
    constexpr bool is_zero() const { return v_ == 0; }

    constexpr Gf256& operator+=(Gf256 o) { v_ ^= o.v_; return *this; }
    constexpr Gf256& operator-=(Gf256 o) { v_ ^= o.v_; return *this; }
    constexpr Gf256& operator*=(Gf256 o) { v_ = mul(v_, o.v_); return *this; }
    constexpr Gf256& operator/=(Gf256 o) { v_ = div(v_, o.v_); return *this; }

    friend constexpr Gf256 operator+(Gf256 a, Gf256 b) { return a += b; }
    friend constexpr Gf256 operator-(Gf256 a, Gf256 b) { return a -= b; }
    friend constexpr Gf256 operator*(Gf256 a, Gf256 b) { return a *= b; }
    friend constexpr Gf256 operator/(Gf256 a, Gf256 b) { return a /= b; }
    friend constexpr Gf256 operator-(Gf256 a) { return a; }
    friend constexpr bool operator==(Gf256 a, Gf256 b) { return a.v_ == b.v_; }
    friend constexpr bool operator!=(Gf256 a, Gf256 b) { return a.v_ != b.v_; }

    friend std::ostream& operator<<(std::ostream& os, Gf256 a) { return os << static_cast<int>(a.v_); }

private:
    std::uint8_t v_ = 0;
};

static_assert(sizeof(Gf256) == 1);

constexpr Gf256 inverse(Gf256 a) { return Gf256(inv(a.value())); }

/// Characteristic 2: every element is its own negation.
constexpr bool is_nonzero(Gf256 a) { return !a.is_zero(); }

}  // namespace bats::gf

namespace Eigen {

template <>
struct NumTraits<bats::gf::Gf256> : GenericNumTraits<bats::gf::Gf256> {
    using Real = bats::gf::Gf256;
    using NonInteger = bats::gf::Gf256;
    using Literal = bats::gf::Gf256;
    using Nested = bats::gf::Gf256;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 0,
        RequireInitialization = 0,
        ReadCost = 1,
        AddCost = 1,
        MulCost = 2
    };
    static inline int digits10() { return 0; }
    static inline bats::gf::Gf256 epsilon() { return bats::gf::Gf256(0); }
    static inline bats::gf::Gf256 dummy_precision() { return bats::gf::Gf256(0); }
};

}  // namespace Eigen
