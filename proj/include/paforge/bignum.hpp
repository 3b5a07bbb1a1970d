#pragma once

/**
 * Large-natural-number arithmetic in base 2^24.
 *
 * The 24-bit limb width is load-bearing: convolving two 32768-limb
 * operands keeps every column sum below 32768 * (2^24 - 1)^2 < 2^63,
 * under the field modulus, so an NTT of the limb sequences recovers the
 * exact product. Reduction modulo a Mersenne prime 2^g - 1 never divides;
 * it folds the high part onto the low part until the value fits in g bits.
 */

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "field.hpp"
#include "ntt.hpp"

namespace paforge {

/// Exponents g for which 2^g - 1 is a known prime, ascending, through
/// the 33rd entry 859433.
inline constexpr std::array<std::uint32_t, 33> kMersenneExponents = {
    2,     3,     5,     7,      13,     17,     19,     31,    61,    89,    107,
    127,   521,   607,   1279,   2203,   2281,   3217,   4253,  4423,  9689,  9941,
    11213, 19937, 21701, 23209,  44497,  86243,  110503, 132049, 216091, 756839,
    859433};

struct LimbVec {
    static constexpr unsigned kLimbBits = 24;
    static constexpr std::uint32_t kLimbMask = 0xffffffu;

    std::vector<std::uint32_t> limbs;  // little-endian, each < 2^24
    std::uint64_t bit_len = 0;         // nominal width for I/O framing; 0 = unframed

    bool is_zero() const {
        for (std::uint32_t l : limbs)
            if (l != 0) return false;
        return true;
    }

    void trim() {
        while (!limbs.empty() && limbs.back() == 0) limbs.pop_back();
    }

    /// Number of significant bits (0 for the value zero).
    std::uint64_t bit_length() const {
        for (std::size_t i = limbs.size(); i-- > 0;) {
            if (limbs[i] != 0)
                return static_cast<std::uint64_t>(i) * kLimbBits + std::bit_width(limbs[i]);
        }
        return 0;
    }

    bool get_bit(std::uint64_t i) const {
        std::size_t limb = static_cast<std::size_t>(i / kLimbBits);
        if (limb >= limbs.size()) return false;
        return (limbs[limb] >> (i % kLimbBits)) & 1u;
    }

    static LimbVec from_u64(std::uint64_t v) {
        LimbVec r;
        while (v != 0) {
            r.limbs.push_back(static_cast<std::uint32_t>(v & kLimbMask));
            v >>= kLimbBits;
        }
        return r;
    }

    std::uint64_t value_u64() const {
        if (bit_length() > 64) throw std::overflow_error("value does not fit in 64 bits");
        std::uint64_t v = 0;
        for (std::size_t i = limbs.size(); i-- > 0;) v = (v << kLimbBits) | limbs[i];
        return v;
    }

    /// Little-endian byte import: bit 0 of byte 0 is the least significant.
    /// Each limb covers exactly three bytes.
    static LimbVec from_bytes(std::span<const std::uint8_t> bytes) {
        LimbVec r;
        r.bit_len = static_cast<std::uint64_t>(bytes.size()) * 8;
        r.limbs.resize((bytes.size() + 2) / 3, 0);
        for (std::size_t i = 0; i < bytes.size(); ++i)
            r.limbs[i / 3] |= static_cast<std::uint32_t>(bytes[i]) << (8 * (i % 3));
        return r;
    }

    /// Little-endian byte export into an exact frame; throws if the value
    /// needs more than `nbytes` bytes.
    std::vector<std::uint8_t> to_bytes(std::size_t nbytes) const {
        if ((bit_length() + 7) / 8 > nbytes)
            throw std::invalid_argument("value does not fit the requested byte frame");
        std::vector<std::uint8_t> out(nbytes, 0);
        for (std::size_t i = 0; i < nbytes; ++i) {
            std::size_t limb = i / 3;
            if (limb < limbs.size())
                out[i] = static_cast<std::uint8_t>(limbs[limb] >> (8 * (i % 3)));
        }
        return out;
    }
};

/// Numeric three-way compare, ignoring framing.
inline int compare(const LimbVec& a, const LimbVec& b) {
    std::size_t n = std::max(a.limbs.size(), b.limbs.size());
    for (std::size_t i = n; i-- > 0;) {
        std::uint32_t la = i < a.limbs.size() ? a.limbs[i] : 0;
        std::uint32_t lb = i < b.limbs.size() ? b.limbs[i] : 0;
        if (la != lb) return la < lb ? -1 : 1;
    }
    return 0;
}

inline LimbVec add(const LimbVec& a, const LimbVec& b) {
    LimbVec r;
    std::size_t n = std::max(a.limbs.size(), b.limbs.size());
    r.limbs.resize(n);
    std::uint32_t carry = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t t = (i < a.limbs.size() ? a.limbs[i] : 0) +
                          (i < b.limbs.size() ? b.limbs[i] : 0) + carry;
        r.limbs[i] = t & LimbVec::kLimbMask;
        carry = t >> LimbVec::kLimbBits;
    }
    if (carry) r.limbs.push_back(carry);
    return r;
}

inline LimbVec low_bits(const LimbVec& x, std::uint64_t n) {
    LimbVec r;
    std::size_t full = static_cast<std::size_t>(n / LimbVec::kLimbBits);
    unsigned rem = static_cast<unsigned>(n % LimbVec::kLimbBits);
    std::size_t keep = std::min(x.limbs.size(), full + (rem ? 1 : 0));
    r.limbs.assign(x.limbs.begin(), x.limbs.begin() + keep);
    if (rem && full < r.limbs.size()) r.limbs[full] &= (1u << rem) - 1;
    r.trim();
    return r;
}

inline LimbVec shift_right_bits(const LimbVec& x, std::uint64_t n) {
    LimbVec r;
    std::size_t ls = static_cast<std::size_t>(n / LimbVec::kLimbBits);
    unsigned bs = static_cast<unsigned>(n % LimbVec::kLimbBits);
    if (ls >= x.limbs.size()) return r;
    std::size_t out_n = x.limbs.size() - ls;
    r.limbs.resize(out_n);
    for (std::size_t i = 0; i < out_n; ++i) {
        std::uint32_t lo = x.limbs[i + ls] >> bs;
        std::uint32_t hi = (bs != 0 && i + ls + 1 < x.limbs.size())
                               ? (x.limbs[i + ls + 1] << (LimbVec::kLimbBits - bs))
                               : 0;
        r.limbs[i] = (lo | hi) & LimbVec::kLimbMask;
    }
    r.trim();
    return r;
}

inline LimbVec shift_left_bits(const LimbVec& x, std::uint64_t n) {
    LimbVec r;
    if (x.is_zero()) return r;
    std::size_t ls = static_cast<std::size_t>(n / LimbVec::kLimbBits);
    unsigned bs = static_cast<unsigned>(n % LimbVec::kLimbBits);
    r.limbs.assign(ls, 0);
    std::uint32_t carry = 0;
    for (std::uint32_t l : x.limbs) {
        std::uint32_t t = ((l << bs) | carry);
        r.limbs.push_back(t & LimbVec::kLimbMask);
        carry = bs ? (l >> (LimbVec::kLimbBits - bs)) : 0;
    }
    if (carry) r.limbs.push_back(carry);
    return r;
}

/// True iff x == 2^g - 1.
inline bool equals_all_ones(const LimbVec& x, std::uint64_t g) {
    std::size_t full = static_cast<std::size_t>(g / LimbVec::kLimbBits);
    unsigned rem = static_cast<unsigned>(g % LimbVec::kLimbBits);
    for (std::size_t i = 0; i < x.limbs.size(); ++i) {
        std::uint32_t want = 0;
        if (i < full) want = LimbVec::kLimbMask;
        else if (i == full && rem) want = (1u << rem) - 1;
        if (x.limbs[i] != want) return false;
    }
    return x.limbs.size() >= full + (rem ? 1 : 0);
}

/// Exact product by O(n^2) limb convolution; the independent check for
/// the transform-based path. Column sums are exact in 64 bits for
/// operands up to 32768 limbs.
inline LimbVec mul_schoolbook(const LimbVec& x, const LimbVec& y) {
    if (x.is_zero() || y.is_zero()) return {};
    if (std::min(x.limbs.size(), y.limbs.size()) > 32768)
        throw std::invalid_argument("schoolbook column sums would overflow past 32768 limbs");
    std::vector<std::uint64_t> col(x.limbs.size() + y.limbs.size(), 0);
    for (std::size_t i = 0; i < x.limbs.size(); ++i) {
        if (x.limbs[i] == 0) continue;
        std::uint64_t xi = x.limbs[i];
        for (std::size_t j = 0; j < y.limbs.size(); ++j) col[i + j] += xi * y.limbs[j];
    }
    LimbVec r;
    r.limbs.resize(col.size());
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < col.size(); ++i) {
        std::uint64_t t = col[i] + carry;
        r.limbs[i] = static_cast<std::uint32_t>(t & LimbVec::kLimbMask);
        carry = t >> LimbVec::kLimbBits;
    }
    while (carry) {
        r.limbs.push_back(static_cast<std::uint32_t>(carry & LimbVec::kLimbMask));
        carry >>= LimbVec::kLimbBits;
    }
    r.trim();
    return r;
}

/// Exact product via the transform pipeline: zero-pad both operands to
/// the plan size, forward-transform, multiply pointwise, inverse, then
/// resolve carries limb by limb.
inline LimbVec mul_ntt(const LimbVec& x, const LimbVec& y, const NttPlan& plan) {
    if (x.is_zero() || y.is_zero()) return {};
    const std::size_t nx = x.limbs.size(), ny = y.limbs.size();
    if (nx > plan.size / 2 || ny > plan.size / 2)
        throw std::invalid_argument("operand too large for NTT plan");

    NttVector fx(plan.size, FieldElem{0}), fy(plan.size, FieldElem{0});
    for (std::size_t i = 0; i < nx; ++i) fx[i] = FieldElem{x.limbs[i]};
    for (std::size_t i = 0; i < ny; ++i) fy[i] = FieldElem{y.limbs[i]};
    fx = forward(plan, fx);
    fy = forward(plan, fy);
    for (std::size_t i = 0; i < plan.size; ++i) fx[i] = mul(fx[i], fy[i]);
    fx = inverse(plan, fx);

    LimbVec r;
    r.limbs.resize(nx + ny);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < r.limbs.size(); ++i) {
        std::uint64_t t = fx[i].v + carry;
        r.limbs[i] = static_cast<std::uint32_t>(t & LimbVec::kLimbMask);
        carry = t >> LimbVec::kLimbBits;
    }
    r.trim();
    return r;
}

/// A Mersenne prime modulus 2^gamma - 1, validated against the exponent
/// catalog at construction.
struct MersenneModulus {
    std::uint32_t gamma;

    explicit MersenneModulus(std::uint32_t g) : gamma(g) {
        if (!std::binary_search(kMersenneExponents.begin(), kMersenneExponents.end(), g))
            throw std::invalid_argument("2^gamma - 1 is not a catalogued Mersenne prime");
    }

    /// The modulus value 2^gamma - 1.
    LimbVec value() const {
        LimbVec p;
        std::size_t full = gamma / LimbVec::kLimbBits;
        unsigned rem = gamma % LimbVec::kLimbBits;
        p.limbs.assign(full, LimbVec::kLimbMask);
        if (rem) p.limbs.push_back((1u << rem) - 1);
        return p;
    }
};

/// Full reduction mod 2^gamma - 1 by iterated folding, canonical result
/// in [0, 2^gamma - 1).
inline LimbVec mersenne_reduce(LimbVec x, const MersenneModulus& m) {
    while (x.bit_length() > m.gamma)
        x = add(low_bits(x, m.gamma), shift_right_bits(x, m.gamma));
    if (equals_all_ones(x, m.gamma)) return {};
    x.trim();
    return x;
}

/// Running sum mod 2^gamma - 1. Additions fold the addend's high half
/// back onto the low half and wrap the carry; nothing ever divides. The
/// resting representative may be 2^gamma - 1 itself; value() canonicalizes
/// it to zero on read-out.
class ModAccumulator {
public:
    explicit ModAccumulator(MersenneModulus m) : mod_(m) {}

    ModAccumulator(MersenneModulus m, const LimbVec& initial) : mod_(m), acc_(initial) {
        if (acc_.bit_length() > mod_.gamma)
            throw std::invalid_argument("accumulator seed exceeds gamma bits");
        acc_.trim();
    }

    /// Add y (< 2^(2*gamma), typically a product of two residues).
    void accumulate(const LimbVec& y) {
        if (y.bit_length() > 2ull * mod_.gamma)
            throw std::invalid_argument("accumulator addend exceeds 2*gamma bits");
        LimbVec t = add(acc_, add(low_bits(y, mod_.gamma), shift_right_bits(y, mod_.gamma)));
        while (t.bit_length() > mod_.gamma)
            t = add(low_bits(t, mod_.gamma), shift_right_bits(t, mod_.gamma));
        acc_ = std::move(t);
    }

    void clear() { acc_ = LimbVec{}; }

    /// Canonical residue in [0, 2^gamma - 1).
    LimbVec value() const {
        if (equals_all_ones(acc_, mod_.gamma)) return {};
        return acc_;
    }

    /// Resting representative, before canonicalization.
    const LimbVec& raw() const { return acc_; }

    const MersenneModulus& modulus() const { return mod_; }

private:
    MersenneModulus mod_;
    LimbVec acc_;
};

}  // namespace paforge
