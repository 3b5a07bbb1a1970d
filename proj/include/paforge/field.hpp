#pragma once

/**
 * Arithmetic in the prime field of order p = 2^64 - 2^32 + 1.
 *
 * This prime admits roots of unity of every power-of-two order up to 2^32
 * and a reduction rule that needs no division: writing a 128-bit product
 * as the 32-bit digits (a,b,c,d) high-to-low, i.e. 2^96 a + 2^64 b +
 * 2^32 c + d, the congruences 2^96 == -1 and 2^64 == 2^32 - 1 (mod p)
 * collapse it to 2^32 (b + c) - a - b + d.
 *
 * Every value held in a FieldElem is canonical (strictly below the
 * modulus); operations may pass through wider intermediates internally
 * but always normalize before returning.
 */

#include <cstdint>
#include <stdexcept>

namespace paforge {

inline constexpr std::uint64_t kFieldPrime = 0xffffffff00000001ULL;

/// Primitive 65536th root of unity; roots of every smaller power-of-two
/// order are obtained by repeated squaring.
inline constexpr std::uint64_t kRoot65536 = 0xed3365469864f124ULL;

struct FieldElem {
    std::uint64_t v = 0;

    constexpr FieldElem() = default;
    explicit constexpr FieldElem(std::uint64_t x)
        : v(x >= kFieldPrime ? x - kFieldPrime : x) {}

    friend constexpr bool operator==(FieldElem, FieldElem) = default;
};

constexpr FieldElem add(FieldElem a, FieldElem b) {
    std::uint64_t s = a.v + b.v;
    // On wraparound the unsigned subtraction of p adds 2^64 - p = 2^32 - 1,
    // which is exactly the fold of the lost 2^64.
    if (s < a.v || s >= kFieldPrime) s -= kFieldPrime;
    FieldElem r;
    r.v = s;
    return r;
}

constexpr FieldElem sub(FieldElem a, FieldElem b) {
    std::uint64_t d = a.v - b.v;
    if (a.v < b.v) d += kFieldPrime;
    FieldElem r;
    r.v = d;
    return r;
}

constexpr FieldElem neg(FieldElem a) {
    FieldElem r;
    r.v = a.v == 0 ? 0 : kFieldPrime - a.v;
    return r;
}

/// Fold a 128-bit value into the field via the digit identity
/// 2^32 (b + c) - a - b + d, grouped as (lo - hi_hi) + (2^32 - 1) * hi_lo
/// so every step fits in 64 bits.
constexpr FieldElem reduce128(std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t hi_hi = hi >> 32;            // digit a, weight 2^96 == -1
    std::uint64_t hi_lo = hi & 0xffffffffULL;  // digit b, weight 2^64 == 2^32 - 1

    std::uint64_t t = lo - hi_hi;
    if (lo < hi_hi) t += kFieldPrime;

    std::uint64_t f = (hi_lo << 32) - hi_lo;

    std::uint64_t s = t + f;
    if (s < f || s >= kFieldPrime) s -= kFieldPrime;
    FieldElem r;
    r.v = s;
    return r;
}

constexpr FieldElem mul(FieldElem a, FieldElem b) {
    unsigned __int128 w = static_cast<unsigned __int128>(a.v) * b.v;
    return reduce128(static_cast<std::uint64_t>(w), static_cast<std::uint64_t>(w >> 64));
}

/// x * 2^k for k < 96, by shifting instead of multiplying. The shifted
/// bits land in a 160-bit window whose segments fold via 2^64 == 2^32 - 1
/// and 2^96 == -1.
constexpr FieldElem mul_pow2(FieldElem x, unsigned k) {
    if (k == 0) return x;
    if (k < 64) return reduce128(x.v << k, x.v >> (64 - k));
    // k in [64, 96): only the middle-32 and high segments are populated
    std::uint64_t mid = (x.v << (k - 64)) & 0xffffffffULL;
    std::uint64_t high = x.v >> (96 - k);
    FieldElem folded{(mid << 32) - mid};
    FieldElem r;
    r.v = high == 0 ? 0 : kFieldPrime - high;
    return add(folded, r);
}

constexpr FieldElem operator+(FieldElem a, FieldElem b) { return add(a, b); }
constexpr FieldElem operator-(FieldElem a, FieldElem b) { return sub(a, b); }
constexpr FieldElem operator*(FieldElem a, FieldElem b) { return mul(a, b); }

/// A root of the form +-2^k, k < 96. Since 2 has order 192 in this field,
/// every power of two is representable this way and multiplication by it
/// is a shift-and-fold.
struct Pow2Root {
    std::uint8_t k = 0;
    bool negate = false;
};

/// 2^e as a Pow2Root, any e (exponents reduce mod 192, 2^96 == -1).
constexpr Pow2Root pow2_root(unsigned e) {
    e %= 192;
    return {static_cast<std::uint8_t>(e % 96), e >= 96};
}

constexpr FieldElem mul_root(FieldElem x, Pow2Root r) {
    FieldElem t = mul_pow2(x, r.k);
    return r.negate ? neg(t) : t;
}

/// Square-and-multiply exponentiation; pow(x, 0) == 1 for every x.
constexpr FieldElem pow(FieldElem a, std::uint64_t e) {
    FieldElem acc{1};
    FieldElem base = a;
    while (e != 0) {
        if (e & 1) acc = mul(acc, base);
        base = mul(base, base);
        e >>= 1;
    }
    return acc;
}

/// Multiplicative inverse by Fermat: a^(p-2). Zero has no inverse.
constexpr FieldElem inv(FieldElem a) {
    if (a.v == 0) throw std::domain_error("field inverse of zero");
    return pow(a, kFieldPrime - 2);
}

/// Primitive root of order 2^k, for 0 <= k <= 16.
constexpr FieldElem root_of_order_pow2(unsigned log2_order) {
    if (log2_order > 16) throw std::invalid_argument("no tabulated root above order 2^16");
    FieldElem w{kRoot65536};
    for (unsigned i = 16; i > log2_order; --i) w = mul(w, w);
    return w;
}

}  // namespace paforge
