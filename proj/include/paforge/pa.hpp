#pragma once

/**
 * MMH-MH privacy amplification.
 *
 * The input key of n = k * gamma bits is split into k sub-blocks, each a
 * residue mod the Mersenne prime p = 2^gamma - 1 (a sub-block equal to
 * 2^gamma - 1 is rejected and replacement material is consumed). The MMH
 * stage folds sum(a_i * x_i) into a running accumulator; the MH stage
 * computes (b*y + c mod 2^alpha) / 2^(alpha-beta) with alpha = gamma and
 * beta = r, realized as a 24-bit frame window over the product. One
 * big-number multiplier (the NTT plan) serves both stages.
 *
 * Security condition enforced at parameter construction: r < gamma - s.
 */

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bignum.hpp"
#include "ntt.hpp"

namespace paforge {

/// The input stream ran dry while (re)loading sub-blocks.
class InsufficientMaterialError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Packed bit sequence, LSB-first within each byte.
struct BitVec {
    std::vector<std::uint8_t> bytes;
    std::uint64_t nbits = 0;

    bool get(std::uint64_t i) const { return (bytes[i / 8] >> (i % 8)) & 1u; }

    void push(bool b) {
        if (nbits % 8 == 0) bytes.push_back(0);
        if (b) bytes.back() |= static_cast<std::uint8_t>(1u << (nbits % 8));
        ++nbits;
    }

    friend bool operator==(const BitVec&, const BitVec&) = default;
};

/// LSB-first cursor over raw key material.
class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint64_t remaining_bits() const { return data_.size() * 8ull - pos_; }

    /// Next `nbits` as a value; throws InsufficientMaterialError when the
    /// stream cannot supply them.
    LimbVec read_value(std::uint64_t nbits) {
        if (remaining_bits() < nbits)
            throw InsufficientMaterialError("key material exhausted while loading a sub-block");
        LimbVec v;
        v.bit_len = nbits;
        v.limbs.resize(static_cast<std::size_t>((nbits + LimbVec::kLimbBits - 1) /
                                                LimbVec::kLimbBits),
                       0);
        for (std::uint64_t i = 0; i < nbits; ++i, ++pos_) {
            if ((data_[pos_ / 8] >> (pos_ % 8)) & 1u)
                v.limbs[i / LimbVec::kLimbBits] |= 1u << (i % LimbVec::kLimbBits);
        }
        return v;
    }

private:
    std::span<const std::uint8_t> data_;
    std::uint64_t pos_ = 0;
};

enum class BlockReason { Ok, AllOnesRejected };

struct BlockVerdict {
    bool accepted;
    BlockReason reason;
};

/// The all-ones residue 2^gamma - 1 is not an element of Z_p and must be
/// replaced with fresh material.
inline BlockVerdict screen_block(const LimbVec& x, std::uint64_t gamma) {
    if (equals_all_ones(x, gamma)) return {false, BlockReason::AllOnesRejected};
    return {true, BlockReason::Ok};
}

/// Bit-exact split of exactly k*gamma bits into k sub-block values.
/// Padding bits in the final byte must be zero; no implicit padding.
inline std::vector<LimbVec> split_blocks(std::span<const std::uint8_t> material,
                                         std::uint64_t gamma, std::uint64_t k) {
    const std::uint64_t need_bits = gamma * k;
    const std::uint64_t need_bytes = (need_bits + 7) / 8;
    if (material.size() != need_bytes)
        throw std::invalid_argument("key material must hold exactly k*gamma bits");
    if (need_bits % 8 != 0) {
        std::uint8_t pad = static_cast<std::uint8_t>(0xffu << (need_bits % 8));
        if (material[material.size() - 1] & pad)
            throw std::invalid_argument("key material must hold exactly k*gamma bits");
    }
    BitReader rd(material);
    std::vector<LimbVec> blocks;
    blocks.reserve(static_cast<std::size_t>(k));
    for (std::uint64_t i = 0; i < k; ++i) blocks.push_back(rd.read_value(gamma));
    return blocks;
}

/// Smallest transform size whose half-length holds a gamma-bit operand.
inline std::size_t plan_size_for_gamma(std::uint64_t gamma) {
    std::size_t limbs = static_cast<std::size_t>((gamma + LimbVec::kLimbBits - 1) /
                                                 LimbVec::kLimbBits);
    std::size_t n = 2;
    while (n < 2 * limbs) n <<= 1;
    return n;
}

/**
 * One MMH-MH compression instance: modulus exponent gamma, sub-block
 * count k, output length r, security parameter s, and the injected seeds
 * a[0..k), b (odd), c. The MH input width alpha equals gamma.
 */
struct PaParams {
    std::uint64_t gamma;
    std::uint64_t k;
    std::uint64_t r;
    std::uint64_t s;
    std::vector<LimbVec> a;  // k residues, each < 2^gamma - 1
    LimbVec b;               // odd, < 2^gamma
    LimbVec c;               // < 2^gamma

    PaParams(std::uint64_t gamma_, std::uint64_t k_, std::uint64_t r_, std::uint64_t s_,
             std::vector<LimbVec> a_, LimbVec b_, LimbVec c_)
        : gamma(gamma_), k(k_), r(r_), s(s_), a(std::move(a_)), b(std::move(b_)),
          c(std::move(c_)) {
        validate();
    }

    std::uint64_t alpha() const { return gamma; }

    static std::size_t seed_bytes_per_field(std::uint64_t gamma) { return (gamma + 7) / 8; }
    static std::size_t seed_file_size(std::uint64_t gamma, std::uint64_t k) {
        return (static_cast<std::size_t>(k) + 2) * seed_bytes_per_field(gamma);
    }

    /// Deterministic seed expansion for benchmarks and tests. Each a_i is
    /// gamma random bits folded into Z_p; b gets its low bit forced on.
    static PaParams from_prng(std::uint64_t gamma, std::uint64_t k, std::uint64_t r,
                              std::uint64_t s, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        MersenneModulus m(static_cast<std::uint32_t>(gamma));
        auto draw = [&](std::uint64_t bits) {
            LimbVec v;
            v.limbs.resize(static_cast<std::size_t>((bits + LimbVec::kLimbBits - 1) /
                                                    LimbVec::kLimbBits));
            for (auto& l : v.limbs) l = static_cast<std::uint32_t>(rng()) & LimbVec::kLimbMask;
            if (bits % LimbVec::kLimbBits)
                v.limbs.back() &= (1u << (bits % LimbVec::kLimbBits)) - 1;
            return v;
        };
        std::vector<LimbVec> a;
        a.reserve(static_cast<std::size_t>(k));
        for (std::uint64_t i = 0; i < k; ++i) a.push_back(mersenne_reduce(draw(gamma), m));
        LimbVec b = draw(gamma);
        if (b.limbs.empty()) b.limbs.push_back(0);
        b.limbs[0] |= 1u;
        LimbVec c = draw(gamma);
        return PaParams(gamma, k, r, s, std::move(a), std::move(b), std::move(c));
    }

    /// Binary seed layout: a_1..a_k, then b, then c, each ceil(gamma/8)
    /// bytes little-endian. Non-canonical fields (a_i outside Z_p, even b)
    /// are rejected rather than repaired.
    static PaParams from_seed_bytes(std::span<const std::uint8_t> bytes, std::uint64_t gamma,
                                    std::uint64_t k, std::uint64_t r, std::uint64_t s) {
        const std::size_t fb = seed_bytes_per_field(gamma);
        if (bytes.size() != seed_file_size(gamma, k))
            throw std::invalid_argument("seed file size does not match (k+2)*ceil(gamma/8) bytes");
        auto field = [&](std::size_t idx) {
            return LimbVec::from_bytes(bytes.subspan(idx * fb, fb));
        };
        std::vector<LimbVec> a;
        a.reserve(static_cast<std::size_t>(k));
        for (std::uint64_t i = 0; i < k; ++i) a.push_back(field(static_cast<std::size_t>(i)));
        LimbVec b = field(static_cast<std::size_t>(k));
        LimbVec c = field(static_cast<std::size_t>(k) + 1);
        return PaParams(gamma, k, r, s, std::move(a), std::move(b), std::move(c));
    }

    std::vector<std::uint8_t> to_seed_bytes() const {
        const std::size_t fb = seed_bytes_per_field(gamma);
        std::vector<std::uint8_t> out;
        out.reserve(seed_file_size(gamma, k));
        for (const auto& ai : a) {
            auto v = ai.to_bytes(fb);
            out.insert(out.end(), v.begin(), v.end());
        }
        auto vb = b.to_bytes(fb);
        out.insert(out.end(), vb.begin(), vb.end());
        auto vc = c.to_bytes(fb);
        out.insert(out.end(), vc.begin(), vc.end());
        return out;
    }

private:
    void validate() const {
        MersenneModulus m(static_cast<std::uint32_t>(gamma));  // gamma must be catalogued
        if (k == 0) throw std::invalid_argument("sub-block count k must be positive");
        if (r == 0) throw std::invalid_argument("final key length r must be positive");
        if (s >= gamma || r >= gamma - s)
            throw std::invalid_argument("security condition violated: require r < gamma - s");
        if (a.size() != k) throw std::invalid_argument("need exactly k MMH seeds");
        for (const auto& ai : a) {
            if (ai.bit_length() > gamma || equals_all_ones(ai, gamma))
                throw std::invalid_argument("MMH seed a_i is not a residue below 2^gamma - 1");
        }
        if (b.bit_length() > gamma) throw std::invalid_argument("MH seed b exceeds gamma bits");
        if (!b.get_bit(0)) throw std::invalid_argument("MH seed b must be odd");
        if (c.bit_length() > gamma) throw std::invalid_argument("MH seed c exceeds gamma bits");
    }
};

/// Streaming window over the 24-bit frames of v: skips the frames below
/// bit alpha-beta, emits the partial first frame, then whole frames, and
/// stops inside frame floor(alpha/24). Bit-identical to
/// (v mod 2^alpha) div 2^(alpha-beta).
inline BitVec extract_window(const LimbVec& v, std::uint64_t alpha, std::uint64_t beta) {
    if (beta >= alpha) throw std::invalid_argument("window width beta must be below alpha");
    constexpr std::uint64_t kFrame = LimbVec::kLimbBits;
    const std::uint64_t lo = alpha - beta;
    BitVec out;
    for (std::uint64_t f = lo / kFrame; f * kFrame < alpha; ++f) {
        std::uint32_t frame = f < v.limbs.size() ? v.limbs[static_cast<std::size_t>(f)] : 0;
        std::uint64_t begin = f * kFrame < lo ? lo - f * kFrame : 0;
        std::uint64_t end = (f + 1) * kFrame > alpha ? alpha - f * kFrame : kFrame;
        for (std::uint64_t bit = begin; bit < end; ++bit) out.push((frame >> bit) & 1u);
    }
    return out;
}

/// MMH inner product y = sum(a_i * x_i) mod 2^gamma - 1, one multiplier
/// call per sub-block feeding the folding accumulator.
inline LimbVec mmh(const PaParams& params, const std::vector<LimbVec>& x, const NttPlan& plan) {
    if (x.size() != params.k) throw std::invalid_argument("expected exactly k sub-blocks");
    ModAccumulator acc{MersenneModulus(static_cast<std::uint32_t>(params.gamma))};
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!screen_block(x[i], params.gamma).accepted)
            throw std::logic_error("all-ones sub-block reached the MMH stage unscreened");
        acc.accumulate(mul_ntt(params.a[i], x[i], plan));
    }
    return acc.value();
}

/// MH core on explicit widths: ((b*y + c) mod 2^alpha) div 2^(alpha-beta).
inline BitVec mh_hash(const LimbVec& b, const LimbVec& c, const LimbVec& y,
                      std::uint64_t alpha, std::uint64_t beta, const NttPlan& plan) {
    return extract_window(add(mul_ntt(b, y, plan), c), alpha, beta);
}

/// MH finalization with alpha = gamma and beta = r.
inline BitVec mh(const PaParams& params, const LimbVec& y, const NttPlan& plan) {
    if (y.bit_length() > params.gamma)
        throw std::invalid_argument("MH input must be below 2^gamma");
    return mh_hash(params.b, params.c, y, params.alpha(), params.r, plan);
}

enum class SessionState { Idle, Mmh, MmhCount, Mh, Output };

/**
 * Streaming compression session mirroring the multiplier-reuse control
 * flow: Idle -> (Mmh -> MmhCount)* -> Mh -> Output -> Idle. A rejected
 * block causes no transition and keeps its seed a_i; the caller feeds a
 * replacement. Single-threaded by contract; the shared plan is read-only.
 */
class PaSession {
public:
    PaSession(const PaParams& params, const NttPlan& plan)
        : params_(&params), plan_(&plan),
          acc_(MersenneModulus(static_cast<std::uint32_t>(params.gamma))) {
        if (plan.size < plan_size_for_gamma(params.gamma))
            throw std::invalid_argument("NTT plan too small for gamma-bit operands");
        trace_.push_back(SessionState::Idle);
    }

    BlockVerdict offer_block(const LimbVec& x) {
        if (state_ != SessionState::Idle && state_ != SessionState::Mmh)
            throw std::logic_error("session is not accepting sub-blocks in this state");
        if (x.bit_length() > params_->gamma)
            throw std::invalid_argument("sub-block exceeds gamma bits");
        BlockVerdict verdict = screen_block(x, params_->gamma);
        if (!verdict.accepted) return verdict;
        if (state_ == SessionState::Idle) enter(SessionState::Mmh);
        acc_.accumulate(mul_ntt(params_->a[static_cast<std::size_t>(cnt_)], x, *plan_));
        enter(SessionState::MmhCount);
        ++cnt_;
        enter(cnt_ < params_->k ? SessionState::Mmh : SessionState::Mh);
        return verdict;
    }

    /// MH stage; only reachable once all k blocks are in.
    BitVec finish() {
        if (state_ != SessionState::Mh)
            throw std::logic_error("MH stage requires cnt == k accepted sub-blocks");
        enter(SessionState::Output);
        BitVec key = mh(*params_, acc_.value(), *plan_);
        acc_.clear();
        cnt_ = 0;
        enter(SessionState::Idle);
        return key;
    }

    SessionState state() const { return state_; }
    std::uint64_t blocks_consumed() const { return cnt_; }

    /// Every state entered since construction, for trace checking.
    const std::vector<SessionState>& trace() const { return trace_; }

private:
    void enter(SessionState s) {
        state_ = s;
        trace_.push_back(s);
    }

    const PaParams* params_;
    const NttPlan* plan_;
    ModAccumulator acc_;
    std::uint64_t cnt_ = 0;
    SessionState state_ = SessionState::Idle;
    std::vector<SessionState> trace_;
};

struct CompressResult {
    BitVec key;
    std::uint64_t rejected_blocks = 0;
};

/// Algorithm end to end: load k sub-blocks (reloading over rejections, in
/// stream order), run MMH, finalize with MH. Deterministic given the
/// parameters and the accepted blocks.
inline CompressResult compress(const PaParams& params, BitReader& material,
                               const NttPlan& plan) {
    PaSession session(params, plan);
    CompressResult res;
    for (std::uint64_t i = 0; i < params.k; ++i) {
        for (;;) {
            LimbVec x = material.read_value(params.gamma);
            if (session.offer_block(x).accepted) break;
            ++res.rejected_blocks;
        }
    }
    res.key = session.finish();
    return res;
}

inline CompressResult compress(const PaParams& params, std::span<const std::uint8_t> material,
                               const NttPlan& plan) {
    BitReader rd(material);
    return compress(params, rd, plan);
}

}  // namespace paforge
