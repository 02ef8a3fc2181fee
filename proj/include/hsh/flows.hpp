#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsh/core.hpp"
#include "hsh/dynamics.hpp"
#include "hsh/errors.hpp"
#include "hsh/tolerances.hpp"
#include "hsh/trees.hpp"
#include "hsh/vec3.hpp"

namespace hsh {

//! An interaction inside a backward flow other than a creation. Times are
//! absolute (same axis as the node times); slots are 0-based configuration
//! indices; `kernel` is the forward-incoming normal velocity (negative).
struct RecollisionEvent {
    double time = 0.0;
    std::size_t i = 0, k = 0;
    Vec3 omega;
    double kernel = 0.0;
};

//! Backward reconstruction from j roots at time t down to time 0, with one
//! particle created per node. Segment r spans (t_{r+1}, t_r) in absolute time
//! (t_0 = t, t_{n+1} = 0) and holds j+r particles. When a creation violates
//! the non-overlap indicator the construction stops at that instant:
//! `constraint_satisfied` is false, `segments` cover (t_r, t], and `terminal`
//! is the overlapping configuration at t_r. The corresponding expansion term
//! is zero, not an error.
struct BackwardFlowResult {
    struct Segment {
        double t_hi = 0.0, t_lo = 0.0;
        BackwardLog log;  // backward run started at t_hi, covering [t_lo, t_hi]
    };
    std::vector<Segment> segments;
    Configuration terminal;
    bool constraint_satisfied = true;
    bool sign_consistent = true;
    std::vector<double> kernel_factors;  // omega_r . (v_{j+r} - eta_{k_r}(t_r))
    std::vector<RecollisionEvent> recollisions;

    //! Configuration at absolute time s within the constructed segments.
    Configuration state_at(double s) const {
        for (const auto& seg : segments)
            if (s >= seg.t_lo && s <= seg.t_hi) return seg.log.state_at_backward(seg.t_hi - s);
        throw invalid_input_error("backward flow: time outside constructed segments");
    }
};

namespace detail {

inline void check_flow_inputs(const Tree& tree, const SignVector& signs,
                              const Configuration& roots, const NodeVariables& nodes, double t) {
    tree.validate();
    if (static_cast<int>(signs.size()) != tree.n())
        throw invalid_input_error("flow: sign vector length does not match the tree");
    if (static_cast<int>(roots.size()) != tree.j)
        throw invalid_input_error("flow: root count does not match the tree");
    if (!(t > 0.0)) throw invalid_input_error("flow: horizon must be positive");
    nodes.validate(t);
    if (static_cast<int>(nodes.times.size()) != tree.n())
        throw invalid_input_error("flow: node count does not match the tree");
}

//! Places particle j+r next to its progenitor and applies the backward
//! scattering rule. Returns the kernel factor omega . (v_new - v_progenitor).
inline double apply_creation(Configuration& c, std::size_t progenitor, const Vec3& omega,
                             const Vec3& velocity) {
    ParticleState created;
    created.x = c[progenitor].x + omega * c.epsilon;
    created.v = velocity;
    const double b = dot(omega, velocity - c[progenitor].v);
    if (b >= 0.0) {
        auto [v_new, v_prog] = scatter(created.v, c[progenitor].v, omega);
        created.v = v_new;
        c[progenitor].v = v_prog;
    }
    c.particles.push_back(created);
    return b;
}

//! True when the newly created last particle overlaps any particle other
//! than its progenitor (the B^eps indicator fails).
inline bool creation_overlaps(const Configuration& c, std::size_t progenitor,
                              const Tolerances& tol) {
    const std::size_t last = c.size() - 1;
    const double floor2 =
        c.epsilon * c.epsilon * (1.0 - 2.0 * tol.overlap_slack);
    for (std::size_t q = 0; q + 1 < c.size(); ++q) {
        if (q == progenitor) continue;
        if (norm2(c[last].x - c[q].x) < floor2) return true;
    }
    return false;
}

inline void harvest_recollisions(const BackwardFlowResult::Segment& seg,
                                 std::vector<RecollisionEvent>& out) {
    for (const auto& e : seg.log.reversed.events)
        out.push_back({seg.t_hi - e.time, e.i, e.k, e.omega,
                       collision_kernel(e.omega, e.vi_before - e.vk_before)});
}

}  // namespace detail

//! Interacting backward flow: hard-sphere dynamics between creations, full
//! recollisions, non-overlap constraint at every creation. Throws the usual
//! pathology error when a backward segment degenerates.
inline BackwardFlowResult ibf(const Tree& tree, const SignVector& signs, const Configuration& roots,
                              const NodeVariables& nodes, double t, const Tolerances& tol = {}) {
    detail::check_flow_inputs(tree, signs, roots, nodes, t);
    BackwardFlowResult result;
    Configuration current = roots;
    double now = t;
    for (int r = 0; r < tree.n(); ++r) {
        const double t_r = nodes.times[static_cast<std::size_t>(r)];
        BackwardFlowResult::Segment seg{now, t_r, evolve_backward(current, now - t_r, tol)};
        current = seg.log.final_state();
        detail::harvest_recollisions(seg, result.recollisions);
        result.segments.push_back(std::move(seg));
        now = t_r;

        const std::size_t progenitor = static_cast<std::size_t>(tree.k[static_cast<std::size_t>(r)] - 1);
        const double b = detail::apply_creation(current, progenitor,
                                                nodes.omegas[static_cast<std::size_t>(r)],
                                                nodes.velocities[static_cast<std::size_t>(r)]);
        result.kernel_factors.push_back(b);
        if ((b >= 0.0) != (signs[static_cast<std::size_t>(r)] > 0)) result.sign_consistent = false;
        if (detail::creation_overlaps(current, progenitor, tol)) {
            result.constraint_satisfied = false;
            result.terminal = current;
            return result;
        }
    }
    BackwardFlowResult::Segment seg{now, 0.0, evolve_backward(current, now, tol)};
    result.terminal = seg.log.final_state();
    detail::harvest_recollisions(seg, result.recollisions);
    result.segments.push_back(std::move(seg));
    return result;
}

//! Enskog backward flow: the same creation rules but free transport between
//! creations. No recollisions, no overlap constraint, no pathologies; the
//! terminal state may leave the admissible phase space.
inline BackwardFlowResult ebf(const Tree& tree, const SignVector& signs, const Configuration& roots,
                              const NodeVariables& nodes, double t, const Tolerances& tol = {}) {
    (void)tol;
    detail::check_flow_inputs(tree, signs, roots, nodes, t);
    BackwardFlowResult result;
    Configuration current = roots;
    double now = t;
    auto free_segment = [](const Configuration& from, double t_hi, double t_lo) {
        Configuration start = from;
        Configuration end = from;
        for (auto& p : end.particles) p.x -= p.v * (t_hi - t_lo);
        TrajectoryLog log;
        log.initial = BackwardLog::reverse(start);
        log.horizon = t_hi - t_lo;
        log.final_state = BackwardLog::reverse(end);
        return BackwardFlowResult::Segment{t_hi, t_lo, BackwardLog{std::move(log)}};
    };
    for (int r = 0; r < tree.n(); ++r) {
        const double t_r = nodes.times[static_cast<std::size_t>(r)];
        auto seg = free_segment(current, now, t_r);
        current = seg.log.final_state();
        result.segments.push_back(std::move(seg));
        now = t_r;

        const std::size_t progenitor = static_cast<std::size_t>(tree.k[static_cast<std::size_t>(r)] - 1);
        const double b = detail::apply_creation(current, progenitor,
                                                nodes.omegas[static_cast<std::size_t>(r)],
                                                nodes.velocities[static_cast<std::size_t>(r)]);
        result.kernel_factors.push_back(b);
        if ((b >= 0.0) != (signs[static_cast<std::size_t>(r)] > 0)) result.sign_consistent = false;
    }
    auto seg = free_segment(current, now, 0.0);
    result.terminal = seg.log.final_state();
    result.segments.push_back(std::move(seg));
    return result;
}

//! One completed decision path of the interacting forward flow.
struct BranchOutcome {
    Configuration endpoint;              // the j surviving particles at time t
    std::string choice_path;             // chronological, e.g. "R,C+,C+"
    std::vector<double> creation_times;  // node order: strictly decreasing
    bool sign_consistent = true;
};

namespace detail {

struct IffFrame {
    const Tree* tree;
    const SignVector* signs;
    double horizon;
    const Tolerances* tol;
    std::vector<BranchOutcome>* out;
};

// Depth-first enumeration. The currently awaited pair is (j+m, k_m); every
// contact of that pair forks into creation and recollision. The awaited slot
// j+m-1 is always the last alive index, so deletion never reindexes.
inline void iff_descend(const IffFrame& f, Configuration state, double s0, int m,
                        std::string path, std::vector<double> times) {
    if (m == 0) {
        const Configuration end = evolve(state, f.horizon - s0, *f.tol).final_state;
        if (static_cast<std::int64_t>(f.out->size()) >= f.tol->branch_cap)
            throw runaway_error("iff: branch cap exceeded");
        BranchOutcome outcome;
        outcome.endpoint = end;
        outcome.choice_path = std::move(path);
        outcome.creation_times.assign(times.rbegin(), times.rend());
        f.out->push_back(std::move(outcome));
        return;
    }
    const std::size_t a = static_cast<std::size_t>(f.tree->j + m - 1);
    const std::size_t b = static_cast<std::size_t>(f.tree->k[static_cast<std::size_t>(m - 1)] - 1);
    const int sigma = (*f.signs)[static_cast<std::size_t>(m - 1)];

    PathologyReport report;
    const TrajectoryLog log = detail::run_events(state, f.horizon - s0, *f.tol, report);
    for (const auto& e : log.events) {
        if ((e.i == a && e.k == b) || (e.i == b && e.k == a)) {
            // Creation at this contact; earlier awaited contacts recollided.
            Configuration c = log.state_at(e.time);
            c[e.i].v = e.vi_before;
            c[e.k].v = e.vk_before;
            const Vec3 omega_pc = (e.i == a) ? e.omega : -e.omega;
            const Vec3 v_node =
                sigma > 0 ? scatter(c[a].v, c[b].v, omega_pc).first : c[a].v;
            const double b_node = dot(omega_pc, v_node - (sigma > 0
                                                              ? (a == e.i ? e.vk_after : e.vi_after)
                                                              : c[b].v));
            if (sigma > 0) c[b].v = (b == e.i) ? e.vi_after : e.vk_after;
            c.particles.pop_back();
            std::string next_path = path.empty() ? "" : path + ",";
            next_path += sigma > 0 ? "C+" : "C-";
            std::vector<double> next_times = times;
            next_times.push_back(s0 + e.time);
            const bool consistent = (b_node >= 0.0) == (sigma > 0);
            const std::size_t before = f.out->size();
            iff_descend(f, std::move(c), s0 + e.time, m - 1, std::move(next_path), std::move(next_times));
            if (!consistent)
                for (std::size_t q = before; q < f.out->size(); ++q)
                    (*f.out)[q].sign_consistent = false;
            path += path.empty() ? "R" : ",R";
        }
    }
    // The all-recollide continuation never met the awaited pair again: the
    // path is eliminated. That verdict needs the segment intact up to t.
    if (!report.empty())
        throw pathology_error("iff: pathology while scanning for the awaited contact", report);
}

}  // namespace detail

//! Interacting forward flow: all decision paths from an order-(j+n) start at
//! time 0 to the surviving j particles at time t. The list may be empty (the
//! start is outside the image of the backward map for this tree and signs).
inline std::vector<BranchOutcome> iff_branches(const Tree& tree, const SignVector& signs,
                                               const Configuration& start, double t,
                                               const Tolerances& tol = {}) {
    tree.validate();
    if (static_cast<int>(signs.size()) != tree.n())
        throw invalid_input_error("iff: sign vector length does not match the tree");
    if (static_cast<int>(start.size()) != tree.j + tree.n())
        throw invalid_input_error("iff: start must hold j+n particles");
    if (!(t > 0.0)) throw invalid_input_error("iff: horizon must be positive");
    std::vector<BranchOutcome> out;
    detail::IffFrame frame{&tree, &signs, t, &tol, &out};
    detail::iff_descend(frame, start, 0.0, tree.n(), "", {});
    return out;
}

namespace detail {

//! Event-structure fingerprint of a backward flow; finite differences are
//! valid only between evaluations with identical fingerprints.
inline std::string flow_signature(const BackwardFlowResult& r) {
    std::string s = r.constraint_satisfied ? "ok" : "violated";
    for (double b : r.kernel_factors) s += b >= 0.0 ? "+" : "-";
    for (const auto& e : r.recollisions)
        s += "|" + std::to_string(e.i) + "." + std::to_string(e.k);
    return s;
}

inline std::size_t flow_dim(const Tree& tree) {
    return 6u * static_cast<std::size_t>(tree.j) + 6u * static_cast<std::size_t>(tree.n());
}

inline std::vector<double> pack_inputs(const Configuration& roots, const NodeVariables& nodes) {
    std::vector<double> u;
    for (const auto& p : roots.particles)
        for (int d = 0; d < 3; ++d) u.push_back(p.x[d]);
    for (const auto& p : roots.particles)
        for (int d = 0; d < 3; ++d) u.push_back(p.v[d]);
    for (std::size_t r = 0; r < nodes.times.size(); ++r) {
        u.push_back(nodes.times[r]);
        u.push_back(0.0);  // chart coordinates around omega_r
        u.push_back(0.0);
        for (int d = 0; d < 3; ++d) u.push_back(nodes.velocities[r][d]);
    }
    return u;
}

inline void unpack_inputs(const std::vector<double>& u, const Configuration& base_roots,
                          const NodeVariables& base_nodes, Configuration& roots,
                          NodeVariables& nodes) {
    roots = base_roots;
    nodes = base_nodes;
    std::size_t p = 0;
    for (auto& part : roots.particles)
        for (int d = 0; d < 3; ++d) part.x[d] = u[p++];
    for (auto& part : roots.particles)
        for (int d = 0; d < 3; ++d) part.v[d] = u[p++];
    for (std::size_t r = 0; r < nodes.times.size(); ++r) {
        nodes.times[r] = u[p++];
        const double ca = u[p++];
        const double cb = u[p++];
        const auto frame = tangent_frame(base_nodes.omegas[r]);
        nodes.omegas[r] = normalized(base_nodes.omegas[r] + frame[0] * ca + frame[1] * cb);
        for (int d = 0; d < 3; ++d) nodes.velocities[r][d] = u[p++];
    }
}

inline std::vector<double> pack_terminal(const Configuration& c) {
    std::vector<double> y;
    for (const auto& p : c.particles)
        for (int d = 0; d < 3; ++d) y.push_back(p.x[d]);
    for (const auto& p : c.particles)
        for (int d = 0; d < 3; ++d) y.push_back(p.v[d]);
    return y;
}

//! |det| by LU with partial pivoting; the matrix is overwritten.
inline double lu_abs_det(std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size();
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
        if (m[pivot][col] == 0.0) return 0.0;
        if (pivot != col) std::swap(m[pivot], m[col]);
        det *= m[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t c2 = col; c2 < n; ++c2) m[r][c2] -= f * m[col][c2];
        }
    }
    return std::fabs(det);
}

}  // namespace detail

//! Relative error of the finite-difference |det| of the backward-flow map
//! (roots, times, contact charts, velocities) -> terminal state against
//! eps^{2n} * prod |kernel factor|. Contact directions are charted by the two
//! tangent directions of their deterministic orthonormal frame, which is
//! isometric at the base point.
inline double ibf_jacobian_residual(const Tree& tree, const SignVector& signs,
                                    const Configuration& roots, const NodeVariables& nodes,
                                    double t, double fd_step, const Tolerances& tol = {}) {
    const BackwardFlowResult base = ibf(tree, signs, roots, nodes, t, tol);
    if (!base.constraint_satisfied)
        throw invalid_input_error("jacobian: base point violates the creation constraint");
    if (!base.sign_consistent)
        throw invalid_input_error("jacobian: base point is sign-inconsistent");
    for (double b : base.kernel_factors)
        if (std::fabs(b) <= tol.kernel_min)
            throw invalid_input_error("jacobian: grazing creation at the base point");
    const std::string base_sig = detail::flow_signature(base);

    const std::size_t dim = detail::flow_dim(tree);
    const std::vector<double> u0 = detail::pack_inputs(roots, nodes);
    auto evaluate = [&](const std::vector<double>& u) {
        Configuration r2;
        NodeVariables n2;
        detail::unpack_inputs(u, roots, nodes, r2, n2);
        BackwardFlowResult res = ibf(tree, signs, r2, n2, t, tol);
        if (detail::flow_signature(res) != base_sig)
            throw degenerate_sample_error("jacobian: perturbation crossed an event boundary");
        return detail::pack_terminal(res.terminal);
    };

    std::vector<std::vector<double>> jac(dim, std::vector<double>(dim, 0.0));
    for (std::size_t col = 0; col < dim; ++col) {
        std::vector<double> up = u0, um = u0;
        up[col] += fd_step;
        um[col] -= fd_step;
        const auto yp = evaluate(up);
        const auto ym = evaluate(um);
        for (std::size_t row = 0; row < dim; ++row)
            jac[row][col] = (yp[row] - ym[row]) / (2.0 * fd_step);
    }
    const double det = detail::lu_abs_det(jac);
    double reference = 1.0;
    for (int r = 0; r < tree.n(); ++r)
        reference *= roots.epsilon * roots.epsilon * std::fabs(base.kernel_factors[static_cast<std::size_t>(r)]);
    return std::fabs(det - reference) / reference;
}

//! The unique preimage of a terminal state under the Enskog backward flow.
struct EbfPreimage {
    Configuration roots;
    NodeVariables nodes;
};

//! Inverts the Enskog backward flow by running free transport forward from
//! the terminal state and undoing the creations in reverse order: each
//! awaited pair must reach distance epsilon exactly once, strictly inside
//! (0, t) and strictly after the previous creation.
inline EbfPreimage ebf_invert(const Tree& tree, const SignVector& signs,
                              const Configuration& terminal, double t,
                              const Tolerances& tol = {}) {
    tree.validate();
    if (static_cast<int>(signs.size()) != tree.n())
        throw invalid_input_error("ebf_invert: sign vector length does not match the tree");
    if (static_cast<int>(terminal.size()) != tree.j + tree.n())
        throw invalid_input_error("ebf_invert: terminal must hold j+n particles");
    if (!(t > 0.0)) throw invalid_input_error("ebf_invert: horizon must be positive");

    Configuration state = terminal;
    double now = 0.0;
    NodeVariables nodes;
    const double eps = terminal.epsilon;
    for (int m = tree.n(); m >= 1; --m) {
        const std::size_t a = static_cast<std::size_t>(tree.j + m - 1);
        const std::size_t b = static_cast<std::size_t>(tree.k[static_cast<std::size_t>(m - 1)] - 1);
        const Vec3 dx = state[a].x - state[b].x;
        const Vec3 dv = state[a].v - state[b].v;
        if (norm2(dx) < eps * eps * (1.0 - 2.0 * tol.overlap_slack))
            throw no_preimage_error("ebf_invert: awaited pair starts overlapped");
        const auto step = detail::approach_root(dx, dv, eps);
        if (!step || *step <= 0.0)
            throw no_preimage_error("ebf_invert: awaited pair never reaches contact");
        const double t_m = now + *step;
        if (!(t_m < t)) throw no_preimage_error("ebf_invert: creation past the horizon");
        for (auto& p : state.particles) p.x += p.v * *step;
        now = t_m;

        const Vec3 omega = normalized(state[a].x - state[b].x);
        Vec3 v_node = state[a].v;
        if (signs[static_cast<std::size_t>(m - 1)] > 0) {
            auto [va, vb] = scatter(state[a].v, state[b].v, omega);
            v_node = va;
            state[b].v = vb;
        }
        nodes.times.insert(nodes.times.begin(), t_m);
        nodes.omegas.insert(nodes.omegas.begin(), omega);
        nodes.velocities.insert(nodes.velocities.begin(), v_node);
        state.particles.pop_back();
    }
    for (auto& p : state.particles) p.x += p.v * (t - now);
    EbfPreimage pre{std::move(state), std::move(nodes)};

    const BackwardFlowResult check = ebf(tree, signs, pre.roots, pre.nodes, t, tol);
    double scale = 1.0;
    for (const auto& p : terminal.particles)
        for (int d = 0; d < 3; ++d)
            scale = std::max({scale, std::fabs(p.x[d]), std::fabs(p.v[d])});
    for (std::size_t q = 0; q < terminal.size(); ++q)
        for (int d = 0; d < 3; ++d)
            if (std::fabs(check.terminal[q].x[d] - terminal[q].x[d]) > tol.ebf_round_trip * scale ||
                std::fabs(check.terminal[q].v[d] - terminal[q].v[d]) > tol.ebf_round_trip * scale)
                throw no_preimage_error("ebf_invert: terminal is outside the flow image");
    return pre;
}

}  // namespace hsh
