#pragma once

/**
 * Number-theoretic transforms over the 2^64 - 2^32 + 1 field.
 *
 * A plan fixes the transform size N (a power of two up to 65536) and the
 * butterfly radix (2, 4 or 16). The transform is decimation-in-time: the
 * input is digit-reversed, then log_r(N) butterfly passes run in place,
 * with one smaller trailing pass when log2(N) is not a multiple of
 * log2(radix). Twiddle tables and the permutation are precomputed at plan
 * construction; plans are immutable afterwards and safe to share across
 * threads. The forward and inverse APIs take and return natural order.
 */

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "field.hpp"

namespace paforge {

using NttVector = std::vector<FieldElem>;

inline constexpr std::size_t kMaxNttSize = 65536;

struct NttPlan {
    std::size_t size = 0;
    unsigned radix = 0;
    std::vector<unsigned> stage_radices;   // execution order; last may be smaller
    std::vector<FieldElem> twiddles;       // W_N^j for j in [0, N)
    std::vector<FieldElem> inv_twiddles;   // W_N^{-j}
    std::vector<std::uint32_t> perm;       // digit reversal: input n lands at perm[n]
    FieldElem n_inv;

    std::size_t stages() const { return stage_radices.size(); }
};

namespace detail {

// Small-DFT kernel roots, one set per direction. All are +-2^k in this
// field (W_16 = 2^12, W_8 = 2^24, W_4 = 2^48), so the kernels multiply
// by shifting.
struct KernelRoots {
    Pow2Root w4;
    Pow2Root w8[4];    // w8[k] = W_8^k
    Pow2Root w16[10];  // w16[x] = W_16^x, x up to 9
};

constexpr KernelRoots make_kernel_roots(bool invert) {
    KernelRoots kr{};
    for (unsigned x = 0; x < 10; ++x)
        kr.w16[x] = pow2_root(invert ? (192 - 12 * x) % 192 : 12 * x);
    for (unsigned k = 0; k < 4; ++k) kr.w8[k] = kr.w16[2 * k];  // W_8 = W_16^2
    kr.w4 = kr.w8[2];
    return kr;
}

inline constexpr KernelRoots kFwdKernel = make_kernel_roots(false);
inline constexpr KernelRoots kInvKernel = make_kernel_roots(true);

// the shift exponents must agree with the squaring chain from W_65536
static_assert(mul_root(FieldElem{1}, kFwdKernel.w16[1]) == root_of_order_pow2(4));
static_assert(mul_root(FieldElem{1}, kFwdKernel.w8[1]) == root_of_order_pow2(3));
static_assert(mul_root(FieldElem{1}, kFwdKernel.w4) == root_of_order_pow2(2));
static_assert(mul(mul_root(FieldElem{1}, kInvKernel.w16[1]), root_of_order_pow2(4)) ==
              FieldElem{1});
static_assert(mul(mul_root(FieldElem{1}, kInvKernel.w4), root_of_order_pow2(2)) ==
              FieldElem{1});

constexpr void dft2(FieldElem* u) {
    FieldElem t = u[0];
    u[0] = add(t, u[1]);
    u[1] = sub(t, u[1]);
}

constexpr void dft4(FieldElem* u, Pow2Root w4) {
    FieldElem e0 = add(u[0], u[2]);
    FieldElem e1 = sub(u[0], u[2]);
    FieldElem o0 = add(u[1], u[3]);
    FieldElem o1 = mul_root(sub(u[1], u[3]), w4);
    u[0] = add(e0, o0);
    u[1] = add(e1, o1);
    u[2] = sub(e0, o0);
    u[3] = sub(e1, o1);
}

constexpr void dft8(FieldElem* u, const KernelRoots& kr) {
    FieldElem e[4] = {u[0], u[2], u[4], u[6]};
    FieldElem o[4] = {u[1], u[3], u[5], u[7]};
    dft4(e, kr.w4);
    dft4(o, kr.w4);
    o[1] = mul_root(o[1], kr.w8[1]);
    o[2] = mul_root(o[2], kr.w8[2]);
    o[3] = mul_root(o[3], kr.w8[3]);
    for (unsigned k = 0; k < 4; ++k) {
        u[k] = add(e[k], o[k]);
        u[k + 4] = sub(e[k], o[k]);
    }
}

// 16-point kernel as a 4x4 split: DFT-4 on the four decimated
// subsequences, twiddle by W_16^(j*t), DFT-4 across subsequences.
constexpr void dft16(FieldElem* u, const KernelRoots& kr) {
    FieldElem f[4][4];
    for (unsigned j = 0; j < 4; ++j) {
        f[j][0] = u[j];
        f[j][1] = u[j + 4];
        f[j][2] = u[j + 8];
        f[j][3] = u[j + 12];
        dft4(f[j], kr.w4);
    }
    for (unsigned j = 1; j < 4; ++j)
        for (unsigned t = 1; t < 4; ++t) f[j][t] = mul_root(f[j][t], kr.w16[j * t]);
    for (unsigned t = 0; t < 4; ++t) {
        FieldElem g[4] = {f[0][t], f[1][t], f[2][t], f[3][t]};
        dft4(g, kr.w4);
        for (unsigned q = 0; q < 4; ++q) u[4 * q + t] = g[q];
    }
}

constexpr void dft_dispatch(FieldElem* u, unsigned r, const KernelRoots& kr) {
    switch (r) {
        case 2: dft2(u); break;
        case 4: dft4(u, kr.w4); break;
        case 8: dft8(u, kr); break;
        case 16: dft16(u, kr); break;
        default: throw std::logic_error("unsupported stage radix");
    }
}

// One decimation-in-time pass. `a` must already be digit-reversed and
// carry the results of all earlier stages.
inline void run_stage(const NttPlan& plan, FieldElem* a, std::size_t stage, bool invert) {
    std::size_t sub_len = 1;
    for (std::size_t i = 0; i < stage; ++i) sub_len *= plan.stage_radices[i];
    const unsigned r = plan.stage_radices[stage];
    const std::size_t block_len = sub_len * r;
    const std::size_t tw_step = plan.size / block_len;
    const FieldElem* tw = (invert ? plan.inv_twiddles : plan.twiddles).data();
    const KernelRoots& kr = invert ? kInvKernel : kFwdKernel;

    FieldElem u[16];
    for (std::size_t base = 0; base < plan.size; base += block_len) {
        for (std::size_t t = 0; t < sub_len; ++t) {
            FieldElem* slot = a + base + t;
            u[0] = slot[0];
            std::size_t e = 0;
            const std::size_t e_step = tw_step * t;
            for (unsigned j = 1; j < r; ++j) {
                e += e_step;
                u[j] = e == 0 ? slot[j * sub_len] : mul(slot[j * sub_len], tw[e]);
            }
            dft_dispatch(u, r, kr);
            for (unsigned j = 0; j < r; ++j) slot[j * sub_len] = u[j];
        }
    }
}

}  // namespace detail

inline NttPlan make_plan(std::size_t size, unsigned radix) {
    if (radix != 2 && radix != 4 && radix != 16)
        throw std::invalid_argument("NTT radix must be 2, 4 or 16");
    if (size < 2 || size > kMaxNttSize || (size & (size - 1)) != 0)
        throw std::invalid_argument("NTT size must be a power of two in [2, 65536]");

    NttPlan plan;
    plan.size = size;
    plan.radix = radix;

    unsigned log2n = 0;
    while ((std::size_t{1} << log2n) < size) ++log2n;
    const unsigned log2r = radix == 2 ? 1 : radix == 4 ? 2 : 4;
    for (unsigned done = 0; done < log2n;) {
        unsigned step = log2n - done >= log2r ? log2r : log2n - done;
        plan.stage_radices.push_back(1u << step);
        done += step;
    }

    const FieldElem w = root_of_order_pow2(log2n);
    if (pow(w, size) != FieldElem{1} || pow(w, size / 2) != FieldElem{kFieldPrime - 1})
        throw std::runtime_error("root-of-unity table failed verification");

    plan.twiddles.resize(size);
    plan.inv_twiddles.resize(size);
    plan.twiddles[0] = plan.inv_twiddles[0] = FieldElem{1};
    const FieldElem w_inv = inv(w);
    for (std::size_t j = 1; j < size; ++j) {
        plan.twiddles[j] = mul(plan.twiddles[j - 1], w);
        plan.inv_twiddles[j] = mul(plan.inv_twiddles[j - 1], w_inv);
    }

    plan.perm.resize(size);
    const auto& st = plan.stage_radices;
    for (std::size_t n = 0; n < size; ++n) {
        std::size_t idx = 0, rem = n, span = size;
        for (std::size_t i = st.size(); i-- > 0;) {
            span /= st[i];
            idx += (rem % st[i]) * span;
            rem /= st[i];
        }
        plan.perm[n] = static_cast<std::uint32_t>(idx);
    }

    plan.n_inv = inv(FieldElem{size});
    return plan;
}

/// The plan's digit-reversal reordering (the first half of `forward`).
inline NttVector digit_reverse(const NttPlan& plan, const NttVector& v) {
    if (v.size() != plan.size) throw std::invalid_argument("vector length does not match plan");
    NttVector out(plan.size);
    for (std::size_t n = 0; n < plan.size; ++n) out[plan.perm[n]] = v[n];
    return out;
}

/// One butterfly pass over a digit-reversed vector that has already been
/// through stages [0, stage). Composing all stages after `digit_reverse`
/// reproduces `forward`.
inline NttVector butterfly_stage(const NttPlan& plan, const NttVector& v, std::size_t stage) {
    if (stage >= plan.stages()) throw std::invalid_argument("stage index out of range");
    if (v.size() != plan.size) throw std::invalid_argument("vector length does not match plan");
    NttVector out = v;
    detail::run_stage(plan, out.data(), stage, false);
    return out;
}

inline NttVector forward(const NttPlan& plan, const NttVector& v) {
    NttVector a = digit_reverse(plan, v);
    for (std::size_t s = 0; s < plan.stages(); ++s) detail::run_stage(plan, a.data(), s, false);
    return a;
}

inline NttVector inverse(const NttPlan& plan, const NttVector& v) {
    NttVector a = digit_reverse(plan, v);
    for (std::size_t s = 0; s < plan.stages(); ++s) detail::run_stage(plan, a.data(), s, true);
    for (auto& x : a) x = mul(x, plan.n_inv);
    return a;
}

}  // namespace paforge
