#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "hsh/core.hpp"

namespace hsh {

//! Bounded continuous test function on j-particle phase points. Three named
//! families cover every check in the suite:
//!   gaussian_packet   : exp(-sum_s |x_s-c_s|^2/(2 wx^2) + |v_s-d_s|^2/(2 wv^2))
//!   polynomial_cutoff : (a0 + a.z) * (1 - r^2/R^2)^2 for r < R, else 0
//!   coordinate_window : smooth window on a single coordinate of slot 0
//! An optional slot permutation relabels the particle arguments before
//! evaluation; the empirical marginal is symmetric, so integrals must not
//! depend on it.
struct Observable {
    enum class Kind { gaussian_packet, polynomial_cutoff, coordinate_window, constant };
    Kind kind = Kind::constant;
    int order = 1;  // number of particle slots j

    std::vector<ParticleState> center;  // gaussian_packet / polynomial_cutoff
    double width_x = 1.0;
    double width_v = 1.0;

    std::vector<double> linear;  // polynomial_cutoff: affine coefficients, size 6j (may be empty)
    double affine0 = 1.0;
    double cutoff_radius = 1.0;

    int window_component = 0;  // coordinate_window: 0..5 maps (x,y,z,vx,vy,vz) of slot 0
    double window_lo = 0.0;
    double window_hi = 1.0;
    double window_sharpness = 0.1;

    std::vector<int> slot_permutation;  // empty = identity

    static Observable one(int order = 1) {
        Observable o;
        o.kind = Kind::constant;
        o.order = order;
        return o;
    }

    static Observable gaussian(std::vector<ParticleState> center, double wx, double wv) {
        Observable o;
        o.kind = Kind::gaussian_packet;
        o.order = static_cast<int>(center.size());
        o.center = std::move(center);
        o.width_x = wx;
        o.width_v = wv;
        return o;
    }

    static Observable polynomial(std::vector<ParticleState> center, double radius,
                                 double a0 = 1.0, std::vector<double> lin = {}) {
        Observable o;
        o.kind = Kind::polynomial_cutoff;
        o.order = static_cast<int>(center.size());
        o.center = std::move(center);
        o.cutoff_radius = radius;
        o.affine0 = a0;
        o.linear = std::move(lin);
        return o;
    }

    static Observable window(int component, double lo, double hi, double sharpness) {
        Observable o;
        o.kind = Kind::coordinate_window;
        o.order = 1;
        o.window_component = component;
        o.window_lo = lo;
        o.window_hi = hi;
        o.window_sharpness = sharpness;
        return o;
    }

    Observable permuted(std::vector<int> perm) const {
        Observable o = *this;
        o.slot_permutation = std::move(perm);
        return o;
    }

    double operator()(const std::vector<ParticleState>& point) const {
        if (static_cast<int>(point.size()) != order)
            throw invalid_input_error("observable: slot count mismatch");
        const std::vector<ParticleState>* p = &point;
        std::vector<ParticleState> permuted_point;
        if (!slot_permutation.empty()) {
            permuted_point.resize(point.size());
            for (std::size_t s = 0; s < point.size(); ++s)
                permuted_point[s] = point[static_cast<std::size_t>(
                    slot_permutation[s])];
            p = &permuted_point;
        }
        switch (kind) {
            case Kind::constant:
                return 1.0;
            case Kind::gaussian_packet: {
                double q = 0.0;
                for (int s = 0; s < order; ++s) {
                    q += norm2((*p)[s].x - center[s].x) / (2.0 * width_x * width_x);
                    q += norm2((*p)[s].v - center[s].v) / (2.0 * width_v * width_v);
                }
                return std::exp(-q);
            }
            case Kind::polynomial_cutoff: {
                double r2 = 0.0;
                double aff = affine0;
                for (int s = 0; s < order; ++s) {
                    const Vec3 dx = (*p)[s].x - center[s].x;
                    const Vec3 dv = (*p)[s].v - center[s].v;
                    r2 += norm2(dx) + norm2(dv);
                    if (!linear.empty()) {
                        const auto* a = &linear[static_cast<std::size_t>(6 * s)];
                        aff += a[0] * dx.x + a[1] * dx.y + a[2] * dx.z + a[3] * dv.x +
                               a[4] * dv.y + a[5] * dv.z;
                    }
                }
                const double u = 1.0 - r2 / (cutoff_radius * cutoff_radius);
                return u > 0.0 ? aff * u * u : 0.0;
            }
            case Kind::coordinate_window: {
                const ParticleState& s0 = (*p)[0];
                const double z = window_component < 3
                                     ? s0.x[window_component]
                                     : s0.v[window_component - 3];
                auto step = [this](double u) {
                    const double w = u / window_sharpness;
                    if (w <= 0.0) return 0.0;
                    if (w >= 1.0) return 1.0;
                    return w * w * (3.0 - 2.0 * w);
                };
                return step(z - window_lo) * step(window_hi - z);
            }
        }
        return 0.0;
    }
};

}  // namespace hsh
