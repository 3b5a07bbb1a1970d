#pragma once

/**
 * Binary serialization of NTT plans and an optional on-disk cache keyed
 * by (size, radix). The cache directory comes from the environment
 * variable PA_FORGE_PLAN_CACHE; a missing, unreadable or stale entry
 * falls back to a fresh build, and cache writes are best-effort.
 */

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "ntt.hpp"

namespace paforge {

namespace detail {

inline constexpr std::uint64_t kPlanMagic = 0x314e414c50465000ULL;  // "\0PFPLAN1"

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return static_cast<bool>(in);
}

}  // namespace detail

inline void save_plan(std::ostream& out, const NttPlan& plan) {
    detail::put(out, detail::kPlanMagic);
    detail::put(out, static_cast<std::uint64_t>(plan.size));
    detail::put(out, static_cast<std::uint32_t>(plan.radix));
    detail::put(out, static_cast<std::uint32_t>(plan.stage_radices.size()));
    for (unsigned r : plan.stage_radices) detail::put(out, static_cast<std::uint32_t>(r));
    detail::put(out, plan.n_inv.v);
    for (FieldElem t : plan.twiddles) detail::put(out, t.v);
    for (FieldElem t : plan.inv_twiddles) detail::put(out, t.v);
    for (std::uint32_t p : plan.perm) detail::put(out, p);
}

/// Parse and sanity-check a serialized plan; nullopt on any mismatch.
inline std::optional<NttPlan> load_plan(std::istream& in) {
    std::uint64_t magic, size;
    std::uint32_t radix, nstages;
    if (!detail::get(in, magic) || magic != detail::kPlanMagic) return std::nullopt;
    if (!detail::get(in, size) || !detail::get(in, radix) || !detail::get(in, nstages))
        return std::nullopt;
    if (size < 2 || size > kMaxNttSize || (size & (size - 1)) != 0 || nstages > 16)
        return std::nullopt;

    NttPlan plan;
    plan.size = static_cast<std::size_t>(size);
    plan.radix = radix;
    plan.stage_radices.resize(nstages);
    std::size_t covered = 1;
    for (auto& r : plan.stage_radices) {
        std::uint32_t v;
        if (!detail::get(in, v) || (v != 2 && v != 4 && v != 8 && v != 16)) return std::nullopt;
        r = v;
        covered *= v;
    }
    if (covered != plan.size) return std::nullopt;

    std::uint64_t n_inv;
    if (!detail::get(in, n_inv)) return std::nullopt;
    plan.n_inv = FieldElem{n_inv};

    plan.twiddles.resize(plan.size);
    plan.inv_twiddles.resize(plan.size);
    plan.perm.resize(plan.size);
    for (auto& t : plan.twiddles) {
        std::uint64_t v;
        if (!detail::get(in, v) || v >= kFieldPrime) return std::nullopt;
        t = FieldElem{v};
    }
    for (auto& t : plan.inv_twiddles) {
        std::uint64_t v;
        if (!detail::get(in, v) || v >= kFieldPrime) return std::nullopt;
        t = FieldElem{v};
    }
    std::vector<bool> seen(plan.size, false);
    for (auto& p : plan.perm) {
        if (!detail::get(in, p) || p >= plan.size || seen[p]) return std::nullopt;
        seen[p] = true;
    }

    // verify the root and scaling before trusting the tables
    FieldElem w = plan.twiddles[1];
    if (pow(w, plan.size) != FieldElem{1} ||
        pow(w, plan.size / 2) != FieldElem{kFieldPrime - 1})
        return std::nullopt;
    if (mul(plan.n_inv, FieldElem{plan.size}) != FieldElem{1}) return std::nullopt;
    if (plan.inv_twiddles[1] != inv(w)) return std::nullopt;
    for (std::size_t j : {std::size_t{0}, plan.size / 3 + 1, plan.size - 1}) {
        if (plan.twiddles[j] != pow(w, j)) return std::nullopt;
        if (plan.inv_twiddles[j] != pow(inv(w), j)) return std::nullopt;
    }
    return plan;
}

/// make_plan, consulting the PA_FORGE_PLAN_CACHE directory when set.
inline NttPlan make_plan_cached(std::size_t size, unsigned radix) {
    const char* dir = std::getenv("PA_FORGE_PLAN_CACHE");
    if (dir == nullptr || *dir == '\0') return make_plan(size, radix);

    namespace fs = std::filesystem;
    fs::path path = fs::path(dir) / ("plan_" + std::to_string(size) + "_r" +
                                     std::to_string(radix) + ".bin");
    {
        std::ifstream in(path, std::ios::binary);
        if (in) {
            auto plan = load_plan(in);
            if (plan && plan->size == size && plan->radix == radix) return std::move(*plan);
        }
    }
    NttPlan plan = make_plan(size, radix);
    std::error_code ec;
    fs::create_directories(dir, ec);  // best effort
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (out) save_plan(out, plan);
    return plan;
}

}  // namespace paforge
