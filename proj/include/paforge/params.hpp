#pragma once

/**
 * Key-parameter selection: the sub-block width gamma comes from the
 * Mersenne-exponent catalog under the multiplier capacity, the sub-block
 * count k from the compression ratio (strictly k < 1/R_PA), and the input
 * block size is N = k * gamma. Compression-ratio curves are consumed as
 * CSV input; nothing here models the optical channel.
 */

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bignum.hpp"

namespace paforge {

namespace detail {

constexpr bool is_prime_u32(std::uint32_t n) {
    if (n < 2) return false;
    for (std::uint32_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

constexpr bool all_exponents_prime() {
    for (std::uint32_t g : kMersenneExponents)
        if (!is_prime_u32(g)) return false;
    return true;
}

static_assert(all_exponents_prime(), "Mersenne exponents must themselves be prime");

inline std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
    unsigned __int128 acc = 1, b = base % m;
    while (e) {
        if (e & 1) acc = acc * b % m;
        b = b * b % m;
        e >>= 1;
    }
    return static_cast<std::uint64_t>(acc);
}

}  // namespace detail

/**
 * Ordered catalog of known Mersenne-prime exponents. Construction
 * spot-verifies the small entries (gamma <= 127) by trial division with
 * candidate factors of the Mersenne form 2*m*gamma + 1, == +-1 (mod 8);
 * any hit means a corrupted catalog.
 */
struct MersenneCatalog {
    static constexpr std::size_t size() { return kMersenneExponents.size(); }
    static constexpr const std::array<std::uint32_t, 33>& exponents() {
        return kMersenneExponents;
    }

    MersenneCatalog() {
        for (std::uint32_t g : kMersenneExponents) {
            if (g > 127) continue;
            for (std::uint64_t m = 1; m <= 20000; ++m) {
                std::uint64_t q = 2 * m * g + 1;
                if (q % 8 != 1 && q % 8 != 7) continue;
                if (g < 64 && q >= (1ull << g) - 1) break;  // proper factors only
                if (detail::powmod_u64(2, g, q) == 1)
                    throw std::logic_error("catalog entry failed Mersenne trial division");
            }
        }
    }
};

/// Largest catalogued exponent gamma with gamma <= n_mul_bits.
inline std::uint32_t choose_gamma(const MersenneCatalog& catalog, std::uint64_t n_mul_bits) {
    std::uint32_t best = 0;
    for (std::uint32_t g : catalog.exponents())
        if (g <= n_mul_bits) best = g;
    if (best == 0)
        throw std::invalid_argument("multiplier capacity below the smallest Mersenne exponent");
    return best;
}

/// Largest integer k with k < 1/r_pa_max (strict: an integral reciprocal
/// rounds down by one).
inline std::uint64_t choose_k(double r_pa_max) {
    if (!(r_pa_max > 0.0) || !(r_pa_max < 1.0))
        throw std::invalid_argument("compression ratio must lie strictly in (0, 1)");
    double q = 1.0 / r_pa_max;
    auto k = static_cast<std::uint64_t>(std::floor(q));
    if (static_cast<double>(k) == q) --k;
    return k;
}

/// Input block size N = k * gamma in bits.
inline std::uint64_t block_size(std::uint32_t gamma, std::uint64_t k) {
    return static_cast<std::uint64_t>(gamma) * k;
}

struct RateCurvePoint {
    double distance_km;
    double r_pa;            // compression ratio, <= 1; may be <= 0 at long range
    double sifted_rate_bps;
};

struct KeyRateRow {
    double distance_km;
    std::uint64_t k;
    std::uint64_t n_bits;
    double final_rate_bps;
};

inline constexpr std::string_view kRateCurveCsvHeader = "distance_km,r_pa,sifted_rate_bps";
inline constexpr std::string_view kKeyRateCsvHeader = "distance_km,k,N_bits,final_rate_bps";

/// Per curve point: k from the strict rule, N = k * gamma, and the final
/// rate sifted_rate * r_pa clamped to zero when no key is possible.
/// Points with r_pa outside (0, 1) yield k = 0 and zero rate.
inline std::vector<KeyRateRow> tabulate_keyrate(const std::vector<RateCurvePoint>& curve,
                                                std::uint32_t gamma) {
    if (curve.empty()) throw std::invalid_argument("rate curve is empty");
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const auto& pt = curve[i];
        if (!std::isfinite(pt.distance_km) || !std::isfinite(pt.r_pa) ||
            !std::isfinite(pt.sifted_rate_bps) || pt.r_pa > 1.0 || pt.sifted_rate_bps < 0.0)
            throw std::invalid_argument("malformed rate curve point");
        if (i > 0 && !(curve[i - 1].distance_km < pt.distance_km))
            throw std::invalid_argument("rate curve distances must be ascending");
    }
    std::vector<KeyRateRow> rows;
    rows.reserve(curve.size());
    for (const auto& pt : curve) {
        KeyRateRow row{pt.distance_km, 0, 0, 0.0};
        if (pt.r_pa > 0.0 && pt.r_pa < 1.0) {
            row.k = choose_k(pt.r_pa);
            row.n_bits = block_size(gamma, row.k);
            row.final_rate_bps = pt.sifted_rate_bps * pt.r_pa;
        }
        rows.push_back(row);
    }
    return rows;
}

namespace detail {

inline std::string strip_cr(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    return s;
}

}  // namespace detail

/// Reads the `distance_km,r_pa,sifted_rate_bps` schema; the header line
/// is mandatory and checked verbatim.
inline std::vector<RateCurvePoint> parse_rate_curve_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::strip_cr(line) != kRateCurveCsvHeader)
        throw std::invalid_argument("rate curve CSV must start with the header '" +
                                    std::string(kRateCurveCsvHeader) + "'");
    std::vector<RateCurvePoint> curve;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        RateCurvePoint pt{};
        char trailing;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf %c", &pt.distance_km, &pt.r_pa,
                        &pt.sifted_rate_bps, &trailing) != 3)
            throw std::invalid_argument("malformed rate curve CSV at line " +
                                        std::to_string(lineno));
        curve.push_back(pt);
    }
    return curve;
}

inline void write_keyrate_csv(std::ostream& out, const std::vector<KeyRateRow>& rows) {
    out << kKeyRateCsvHeader << '\n';
    char buf[128];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%llu,%llu,%.10g", row.distance_km,
                      static_cast<unsigned long long>(row.k),
                      static_cast<unsigned long long>(row.n_bits), row.final_rate_bps);
        out << buf << '\n';
    }
}

}  // namespace paforge
