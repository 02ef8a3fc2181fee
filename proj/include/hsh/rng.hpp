#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace hsh {

// splitmix64: the standard 64-bit finalizer, used only to mix seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// One master seed fans out into independent named sub-streams ("search",
// "mc", "mollifier", ...); an optional index gives per-sample streams whose
// draws do not depend on evaluation order, so worker pools stay deterministic.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t s = seed ^ fnv1a64(name);
    std::uint64_t mixed = s;
    splitmix64(mixed);
    mixed ^= 0x6a09e667f3bcc909ULL + index * 0x9e3779b97f4a7c15ULL;
    std::seed_seq seq{static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

// Halton sequence in `dim` dimensions (index starts at 1). Deterministic
// low-discrepancy points for mollifier quadrature; no scrambling, so every
// run of a given configuration integrates the exact same point set.
inline std::vector<double> halton_point(std::uint64_t index, int dim) {
    static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                                 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};
    std::vector<double> out(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        const int b = primes[d % 30];
        double f = 1.0, r = 0.0;
        std::uint64_t i = index + (d / 30) * 7919;  // fold extra dims with an offset
        while (i > 0) {
            f /= b;
            r += f * static_cast<double>(i % b);
            i /= b;
        }
        out[static_cast<std::size_t>(d)] = r;
    }
    return out;
}

// Inverse of the standard normal CDF (Acklam's rational approximation,
// |error| < 1.2e-9), used to push Halton points through a Gaussian.
inline double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01, -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;
    if (p <= 0.0) p = 1e-16;
    if (p >= 1.0) p = 1.0 - 1e-16;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - plow) {
        q = p - 0.5;
        r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace hsh
