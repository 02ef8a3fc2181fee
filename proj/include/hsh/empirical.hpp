#pragma once

#include <vector>

#include "hsh/core.hpp"
#include "hsh/observable.hpp"
#include "hsh/rational.hpp"

namespace hsh {

//! Finite atomic measure on j-particle phase space: a list of weighted phase
//! points. Weights are exact rationals so that combinatorial identities
//! (normalization, term cancellation) can be checked without float slop.
struct DiracComb {
    struct Atom {
        std::vector<ParticleState> point;  // j particle states
        Rational weight;
    };
    int order = 1;
    std::vector<Atom> atoms;

    Rational total_weight() const {
        Rational t = Rational::integer(0);
        for (const auto& a : atoms) t = t + a.weight;
        return t;
    }
};

//! Integral of a bounded observable against a comb.
inline double integrate(const DiracComb& comb, const Observable& phi) {
    if (phi.order != comb.order) throw invalid_input_error("integrate: order mismatch");
    double out = 0.0;
    for (const auto& a : comb.atoms) out += a.weight.value() * phi(a.point);
    return out;
}

//! The empirical measure of a configuration: one atom of mass 1/N per sphere.
inline DiracComb empirical_measure(const Configuration& c) {
    const auto n = static_cast<std::int64_t>(c.size());
    if (n == 0) throw invalid_input_error("empirical_measure: empty configuration");
    DiracComb comb;
    comb.order = 1;
    for (const auto& p : c.particles) comb.atoms.push_back({{p}, Rational(1, n)});
    return comb;
}

namespace detail {

// Visits every ordered injection (i_1..i_j), all labels distinct, from
// {0..n-1}. The callback receives the label tuple.
template <typename F>
inline void for_each_injection(std::size_t n, std::size_t j, F&& f) {
    std::vector<std::size_t> tuple(j);
    std::vector<bool> used(n, false);
    auto rec = [&](auto&& self, std::size_t depth) -> void {
        if (depth == j) {
            f(tuple);
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            used[i] = true;
            tuple[depth] = i;
            self(self, depth + 1);
            used[i] = false;
        }
    };
    rec(rec, 0);
}

// Visits every j-tuple with repetition from {0..n-1}.
template <typename F>
inline void for_each_tuple(std::size_t n, std::size_t j, F&& f) {
    std::vector<std::size_t> tuple(j, 0);
    while (true) {
        f(tuple);
        std::size_t d = j;
        while (d > 0) {
            --d;
            if (++tuple[d] < n) break;
            tuple[d] = 0;
            if (d == 0) return;
        }
        if (j == 0) return;
    }
}

}  // namespace detail

//! The j-particle empirical marginal: one atom per ordered injection of j
//! distinct labels, each of mass 1/(N(N-1)...(N-j+1)). Symmetric under slot
//! permutation by construction.
inline DiracComb marginal(const Configuration& c, int j) {
    const auto n = static_cast<std::int64_t>(c.size());
    if (j < 1 || j > static_cast<int>(c.size()))
        throw invalid_input_error("marginal: order out of range");
    DiracComb comb;
    comb.order = j;
    const Rational w(1, falling_factorial(n, j));
    detail::for_each_injection(c.size(), static_cast<std::size_t>(j),
                               [&](const std::vector<std::size_t>& labels) {
                                   DiracComb::Atom atom;
                                   atom.weight = w;
                                   for (std::size_t i : labels) atom.point.push_back(c[i]);
                                   comb.atoms.push_back(std::move(atom));
                               });
    return comb;
}

//! | integral of phi against the j-marginal  -  N^j/(N...(N-j+1)) * integral
//! against the j-fold product of the empirical measure |. The two agree
//! whenever phi kills tuples with repeated labels (the product measure's
//! diagonal atoms), which is the quantitative content of the marginal /
//! tensor-power identity away from contractions.
inline double tensor_identity_residual(const Configuration& c, int j, const Observable& phi) {
    const auto n = static_cast<std::int64_t>(c.size());
    const double lhs = integrate(marginal(c, j), phi);
    double rhs = 0.0;
    const double wj = std::pow(static_cast<double>(n), -j);
    detail::for_each_tuple(c.size(), static_cast<std::size_t>(j),
                           [&](const std::vector<std::size_t>& labels) {
                               std::vector<ParticleState> point;
                               point.reserve(labels.size());
                               for (std::size_t i : labels) point.push_back(c[i]);
                               rhs += wj * phi(point);
                           });
    double factor = std::pow(static_cast<double>(n), j) /
                    static_cast<double>(falling_factorial(n, j));
    return std::fabs(lhs - factor * rhs);
}

}  // namespace hsh
