#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "hsh/errors.hpp"
#include "hsh/tolerances.hpp"
#include "hsh/vec3.hpp"

namespace hsh {

//! Position and velocity of one sphere center.
struct ParticleState {
    Vec3 x;
    Vec3 v;
};

//! N spheres of common diameter epsilon. The admissible set requires every
//! pair of centers at distance >= epsilon; constructors and evolution entry
//! points enforce it, everything downstream may assume it.
struct Configuration {
    double epsilon = 1.0;
    std::vector<ParticleState> particles;

    std::size_t size() const { return particles.size(); }
    ParticleState& operator[](std::size_t i) { return particles[i]; }
    const ParticleState& operator[](std::size_t i) const { return particles[i]; }
};

//! Geometry of a pair at contact. `omega` points from the center of the
//! second named particle toward the first: omega = (x_i - x_k)/epsilon for
//! pair (i, k). `approach` is the collision kernel omega.(v_i - v_k); it is
//! negative for an incoming pair and positive for an outgoing one.
struct ContactGeometry {
    std::size_t i = 0;
    std::size_t k = 0;
    Vec3 omega;
    Vec3 relative_velocity;  // v_i - v_k
    double approach = 0.0;   // dot(omega, relative_velocity)
};

//! Collision kernel B(omega; V) = omega.V.
inline double collision_kernel(const Vec3& omega, const Vec3& relative_velocity) {
    return dot(omega, relative_velocity);
}

//! Elastic reflection of a pair at contact normal omega. Exchanges the normal
//! component of the relative velocity:
//!   v_i' = v_i - omega (omega.(v_i - v_k)),  v_k' = v_k + omega (omega.(v_i - v_k)).
//! Even in omega, involutive, and conserves momentum and kinetic energy to
//! rounding. Requires |omega| = 1 within 1e-12.
inline std::pair<Vec3, Vec3> scatter(const Vec3& v_i, const Vec3& v_k, const Vec3& omega) {
    if (std::fabs(norm(omega) - 1.0) > 1e-12)
        throw invalid_input_error("scatter: contact normal is not unit length");
    const Vec3 impulse = omega * dot(omega, v_i - v_k);
    return {v_i - impulse, v_k + impulse};
}

//! True when a contact with this normal relative speed counts as grazing.
inline bool is_grazing(double approach, const Vec3& relative_velocity, const Tolerances& tol) {
    return std::fabs(approach) < tol.grazing * (1.0 + norm(relative_velocity));
}

namespace detail {

// Root of |dx + s dv|^2 = eps^2 with dx.dv < 0 (the approaching branch),
// written as c / (-beta + sqrt(beta^2 - a c)) to stay stable as the gap
// closes. Callers decide how to treat s <= 0.
inline std::optional<double> approach_root(const Vec3& dx, const Vec3& dv, double eps) {
    const double beta = dot(dx, dv);
    if (beta >= 0.0) return std::nullopt;  // separating or tangential drift
    const double a = dot(dv, dv);
    if (a == 0.0) return std::nullopt;
    const double c = dot(dx, dx) - eps * eps;
    const double disc = beta * beta - a * c;
    if (disc < 0.0) return std::nullopt;  // closest approach stays above eps
    return c / (-beta + std::sqrt(disc));
}

}  // namespace detail

//! First future contact time of two freely streaming spheres of diameter
//! epsilon, or nullopt when they never reach distance epsilon while
//! approaching. The pair must start admissible: a gap below
//! -overlap_slack*epsilon is an overlap error. A start within the slack of
//! exact contact returns 0 when the pair is approaching.
inline std::optional<double> contact_time(const ParticleState& a, const ParticleState& b,
                                          double epsilon, const Tolerances& tol = {}) {
    const Vec3 dx = a.x - b.x;
    const Vec3 dv = a.v - b.v;
    const double gap2 = dot(dx, dx) - epsilon * epsilon;
    if (gap2 < -2.0 * tol.overlap_slack * epsilon * epsilon)
        throw overlap_error("contact_time: spheres overlap at the initial instant");
    auto s = detail::approach_root(dx, dv, epsilon);
    if (!s) return std::nullopt;
    if (*s < 0.0) return 0.0;  // within slack of contact and approaching
    return s;
}

//! Contact geometry of pair (i, k) after streaming it freely for time s.
inline ContactGeometry contact_geometry(const Configuration& c, std::size_t i, std::size_t k,
                                        double s) {
    ContactGeometry g;
    g.i = i;
    g.k = k;
    const Vec3 xi = c[i].x + c[i].v * s;
    const Vec3 xk = c[k].x + c[k].v * s;
    g.omega = (xi - xk) / c.epsilon;
    // Renormalize: |xi - xk| equals epsilon only up to the contact solver's
    // rounding, and scatter insists on a unit normal.
    g.omega = normalized(g.omega);
    g.relative_velocity = c[i].v - c[k].v;
    g.approach = collision_kernel(g.omega, g.relative_velocity);
    return g;
}

//! Smallest center distance over all pairs. For N < 2 returns +infinity.
inline double min_gap(const Configuration& c) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        for (std::size_t k = i + 1; k < c.size(); ++k)
            best = std::min(best, norm(c[i].x - c[k].x));
    return best;
}

//! Throws overlap_error unless every pair respects the diameter (within the
//! overlap slack).
inline void check_admissible(const Configuration& c, const Tolerances& tol = {}) {
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        for (std::size_t k = i + 1; k < c.size(); ++k) {
            const double d = norm(c[i].x - c[k].x);
            if (d < c.epsilon * (1.0 - tol.overlap_slack))
                throw overlap_error("configuration: spheres " + std::to_string(i) + " and " +
                                    std::to_string(k) + " overlap");
        }
}

//! Total momentum of a configuration.
inline Vec3 total_momentum(const Configuration& c) {
    Vec3 p;
    for (const auto& s : c.particles) p += s.v;
    return p;
}

//! Total kinetic energy (unit masses).
inline double total_energy(const Configuration& c) {
    double e = 0.0;
    for (const auto& s : c.particles) e += 0.5 * norm2(s.v);
    return e;
}

}  // namespace hsh
