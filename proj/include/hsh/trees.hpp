#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hsh/errors.hpp"
#include "hsh/vec3.hpp"

namespace hsh {

//! Unsigned big natural, base 1e9 limbs. Only used so that tree counts never
//! silently wrap; arithmetic is limited to what counting needs.
struct BigNat {
    std::vector<std::uint32_t> limbs{0};  // little-endian, base 1e9

    static BigNat one() { return BigNat{{1}}; }

    void mul_small(std::uint64_t m) {
        std::uint64_t carry = 0;
        for (auto& l : limbs) {
            const std::uint64_t cur = static_cast<std::uint64_t>(l) * m + carry;
            l = static_cast<std::uint32_t>(cur % 1000000000ULL);
            carry = cur / 1000000000ULL;
        }
        while (carry) {
            limbs.push_back(static_cast<std::uint32_t>(carry % 1000000000ULL));
            carry /= 1000000000ULL;
        }
    }

    bool fits_u64() const {
        const std::string s = str();
        if (s.size() < 20) return true;
        return s.size() == 20 && s <= std::to_string(UINT64_MAX);
    }

    std::uint64_t as_u64() const {
        std::uint64_t v = 0;
        for (std::size_t i = limbs.size(); i-- > 0;) v = v * 1000000000ULL + limbs[i];
        return v;
    }

    std::string str() const {
        std::string out = std::to_string(limbs.back());
        for (std::size_t i = limbs.size() - 1; i-- > 0;) {
            std::string part = std::to_string(limbs[i]);
            out += std::string(9 - part.size(), '0') + part;
        }
        return out;
    }
};

//! Collision tree with j roots and n added particles: added particle j+r is
//! attached to progenitor k[r-1], a particle created earlier or a root, so
//! 1 <= k[r-1] <= j+r-1. Progenitor labels are 1-based to match the literal
//! syntax.
struct Tree {
    int j = 1;
    std::vector<int> k;

    int n() const { return static_cast<int>(k.size()); }

    void validate() const {
        if (j < 1) throw invalid_input_error("tree: at least one root required");
        for (int r = 1; r <= n(); ++r) {
            const int kr = k[static_cast<std::size_t>(r - 1)];
            if (kr < 1 || kr > j + r - 1)
                throw invalid_input_error("tree: progenitor out of range at node " +
                                          std::to_string(r));
        }
    }
};

//! Sign vector: one +1/-1 per added particle.
using SignVector = std::vector<int>;

//! Node variables of a backward expansion term: creation times (strictly
//! decreasing, inside (0, horizon)), contact directions, and created
//! velocities, one triple per added particle.
struct NodeVariables {
    std::vector<double> times;
    std::vector<Vec3> omegas;
    std::vector<Vec3> velocities;

    void validate(double horizon) const {
        const std::size_t n = times.size();
        if (omegas.size() != n || velocities.size() != n)
            throw invalid_input_error("node variables: length mismatch");
        for (std::size_t r = 0; r < n; ++r) {
            if (!(times[r] > 0.0 && times[r] < horizon))
                throw invalid_input_error("node variables: time outside (0, horizon)");
            if (r > 0 && !(times[r] < times[r - 1]))
                throw invalid_input_error("node variables: times must decrease strictly");
            if (std::fabs(norm(omegas[r]) - 1.0) > 1e-12)
                throw invalid_input_error("node variables: contact direction not unit");
        }
    }
};

//! Number of trees with j roots and n added particles: j (j+1) ... (j+n-1).
inline BigNat tree_count(int j, int n) {
    if (j < 1 || n < 0) throw invalid_input_error("tree_count: bad arguments");
    BigNat c = BigNat::one();
    for (int r = 0; r < n; ++r) c.mul_small(static_cast<std::uint64_t>(j + r));
    return c;
}

//! All trees with j roots and n added particles, lexicographic in k.
inline std::vector<Tree> enumerate_trees(int j, int n) {
    std::vector<Tree> out;
    Tree t;
    t.j = j;
    t.k.assign(static_cast<std::size_t>(n), 1);
    if (n == 0) {
        out.push_back(t);
        return out;
    }
    while (true) {
        out.push_back(t);
        int r = n - 1;
        while (r >= 0) {
            auto& kr = t.k[static_cast<std::size_t>(r)];
            if (++kr <= j + r) break;
            kr = 1;
            --r;
        }
        if (r < 0) break;
    }
    return out;
}

//! All sign vectors of length n; '+' varies slowest, so the all-plus vector
//! comes first.
inline std::vector<SignVector> enumerate_signs(int n) {
    std::vector<SignVector> out;
    const std::size_t total = static_cast<std::size_t>(1) << n;
    for (std::size_t mask = 0; mask < total; ++mask) {
        SignVector s(static_cast<std::size_t>(n), +1);
        for (int r = 0; r < n; ++r)
            if (mask & (static_cast<std::size_t>(1) << (n - 1 - r))) s[static_cast<std::size_t>(r)] = -1;
        out.push_back(std::move(s));
    }
    return out;
}

//! Collision-number prefactor r (r-1) ... (r-n+1) eps^{2n}; equals zero when
//! n exceeds r and one when n = 0. Combined with the eps^{-2n} in the
//! expansion it is the number of ordered ways to pick the added particles.
inline double alpha(std::int64_t r, int n, double epsilon) {
    if (n == 0) return 1.0;
    if (n > r) return 0.0;
    double out = 1.0;
    for (int i = 0; i < n; ++i) out *= static_cast<double>(r - i);
    for (int i = 0; i < n; ++i) out *= epsilon * epsilon;
    return out;
}

//! Literal syntax "j=2;k=1,2,1,3,2;s=++-+-". The sign section accepts ASCII
//! '-' as well as the typographic minus; the formatter always emits ASCII.
inline std::string format_tree(const Tree& t, const SignVector& s) {
    std::string out = "j=" + std::to_string(t.j) + ";k=";
    for (std::size_t r = 0; r < t.k.size(); ++r) {
        if (r) out += ',';
        out += std::to_string(t.k[r]);
    }
    out += ";s=";
    for (std::size_t r = 0; r < s.size(); ++r) out += s[r] > 0 ? '+' : '-';
    return out;
}

inline std::pair<Tree, SignVector> parse_tree(const std::string& literal) {
    auto fail = [&]() -> void {
        throw invalid_input_error("tree literal: expected j=J;k=K1,K2,...;s=SIGNS, got \"" +
                                  literal + "\"");
    };
    Tree tree;
    SignVector signs;
    std::size_t pos = 0;
    auto expect = [&](const char* lit) {
        const std::size_t len = std::string(lit).size();
        if (literal.compare(pos, len, lit) != 0) fail();
        pos += len;
    };
    expect("j=");
    std::size_t used = 0;
    tree.j = std::stoi(literal.substr(pos), &used);
    pos += used;
    expect(";k=");
    while (pos < literal.size() && literal[pos] != ';') {
        tree.k.push_back(std::stoi(literal.substr(pos), &used));
        pos += used;
        if (pos < literal.size() && literal[pos] == ',') ++pos;
    }
    expect(";s=");
    while (pos < literal.size()) {
        if (literal[pos] == '+') {
            signs.push_back(+1);
            ++pos;
        } else if (literal[pos] == '-') {
            signs.push_back(-1);
            ++pos;
        } else if (literal.compare(pos, 3, "\xe2\x88\x92") == 0) {  // U+2212
            signs.push_back(-1);
            pos += 3;
        } else {
            fail();
        }
    }
    if (signs.size() != tree.k.size()) fail();
    tree.validate();
    return {tree, signs};
}

//! Product of the entries of a sign vector.
inline int sign_product(const SignVector& s) {
    int p = 1;
    for (int v : s) p *= v;
    return p;
}

}  // namespace hsh
