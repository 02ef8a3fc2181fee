#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "hsh/errors.hpp"

namespace hsh {

//! Exact rational with 64-bit components. Comb weights are reciprocals of
//! falling factorials of the particle number, so magnitudes stay tiny; the
//! 128-bit intermediates below are pure paranoia.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }
    static Rational integer(std::int64_t n) { return Rational(n, 1); }

    void normalize() {
        if (den == 0) throw invalid_input_error("rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (num == 0) den = 1;
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    Rational operator*(const Rational& o) const {
        const __int128 n = static_cast<__int128>(num) * o.num;
        const __int128 d = static_cast<__int128>(den) * o.den;
        return from128(n, d);
    }
    Rational operator+(const Rational& o) const {
        const __int128 n =
            static_cast<__int128>(num) * o.den + static_cast<__int128>(o.num) * den;
        const __int128 d = static_cast<__int128>(den) * o.den;
        return from128(n, d);
    }
    Rational operator-() const { return Rational(-num, den); }
    Rational operator-(const Rational& o) const { return *this + (-o); }

    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }

    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

  private:
    static Rational from128(__int128 n, __int128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 an = n < 0 ? -n : n;
        __int128 g = gcd128(an, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw invalid_input_error("rational: overflow");
        Rational r;
        r.num = static_cast<std::int64_t>(n);
        r.den = static_cast<std::int64_t>(d);
        if (r.num == 0) r.den = 1;
        return r;
    }
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a < 0 ? -a : a;
    }
};

//! Falling factorial n (n-1) ... (n-k+1) as an exact integer.
inline std::int64_t falling_factorial(std::int64_t n, std::int64_t k) {
    if (k < 0) throw invalid_input_error("falling_factorial: negative length");
    std::int64_t out = 1;
    for (std::int64_t i = 0; i < k; ++i) {
        if (n - i <= 0) return 0;
        out *= (n - i);
    }
    return out;
}

}  // namespace hsh
