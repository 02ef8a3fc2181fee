#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "hsh/dynamics.hpp"
#include "hsh/parallel.hpp"
#include "hsh/rng.hpp"

namespace hsh {

//! Ordered list of unordered colliding pairs, 1-based as in the tree literal
//! syntax: [(2,3),(1,2)] means sphere 2 hits 3, then 1 hits 2.
using CollisionSequenceTarget = std::vector<std::pair<int, int>>;

//! A benchmark instance: initial data, horizon, optional partition boundary
//! times (including 0 and the horizon), the tolerances it was validated
//! under, and the seed that produced it.
struct Scenario {
    Configuration initial;
    double horizon = 1.0;
    std::vector<double> partition;
    Tolerances tolerances;
    std::uint64_t seed = 0;
};

namespace detail {

inline Configuration drop_particle(const Configuration& c, std::size_t drop) {
    Configuration out;
    out.epsilon = c.epsilon;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (i != drop) out.particles.push_back(c[i]);
    return out;
}

// First collision time of a configuration within horizon, infinity if free.
// A pathology counts as an obstruction at the incident time.
inline double first_collision_time(const Configuration& c, double horizon,
                                   const Tolerances& tol) {
    try {
        auto log = evolve(c, horizon, tol);
        return log.events.empty() ? std::numeric_limits<double>::infinity()
                                  : log.events.front().time;
    } catch (const pathology_error& e) {
        double first = std::numeric_limits<double>::infinity();
        for (const auto& inc : e.report.grazing) first = std::min(first, inc.time);
        for (const auto& inc : e.report.simultaneous) first = std::min(first, inc.time);
        for (const auto& inc : e.report.near_triple) first = std::min(first, inc.time);
        return first;
    }
}

}  // namespace detail

//! Checks a claimed partition against the two defining properties by direct
//! simulation: (1) each interior interval contains exactly one collision and
//! the final interval none; (2) on each colliding interval, removing either
//! collision partner at the interval start yields a collision-free flow up to
//! the interval end. Violations raise invalid_partition_error.
inline void verify_partition(const Scenario& sc, const std::vector<double>& times) {
    const auto& tol = sc.tolerances;
    auto log = evolve(sc.initial, sc.horizon, tol);
    const std::size_t S = log.events.size();
    if (times.size() != S + 2)
        throw invalid_partition_error("partition: expected " + std::to_string(S + 2) +
                                      " boundary times, got " + std::to_string(times.size()));
    if (std::fabs(times.front()) > 1e-12 || std::fabs(times.back() - sc.horizon) > 1e-12)
        throw invalid_partition_error("partition: boundaries must span [0, horizon]");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw invalid_partition_error("partition: boundary times must increase strictly");

    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        std::size_t inside = 0;
        for (const auto& e : log.events)
            if (e.time > times[i] && e.time < times[i + 1]) ++inside;
        const std::size_t want = i < S ? 1 : 0;
        if (inside != want)
            throw invalid_partition_error("partition: interval " + std::to_string(i) +
                                          " contains " + std::to_string(inside) +
                                          " collisions, expected " + std::to_string(want));
        if (i < S) {
            const auto& e = log.events[i];
            const Configuration at_start = log.state_at(times[i]);
            const double span = times[i + 1] - times[i];
            for (std::size_t drop : {e.i, e.k}) {
                auto loo = detail::drop_particle(at_start, drop);
                if (detail::first_collision_time(loo, span, tol) <= span)
                    throw invalid_partition_error(
                        "partition: leave-one-out flow of interval " + std::to_string(i) +
                        " is not free when removing particle " + std::to_string(drop));
            }
        }
    }
}

//! Builds the partition boundary times for a pathology-free scenario with S
//! collisions: S+1 intervals, one collision each plus a free tail. Each
//! boundary after a collision is placed at tau + half the tightest of the two
//! leave-one-out first-collision slacks and the gap to the next collision, so
//! both properties hold with margin. A margin below partition_margin * horizon
//! means the collision structure is too tight to separate.
inline std::vector<double> build_partition(const Scenario& sc) {
    const auto& tol = sc.tolerances;
    auto log = evolve(sc.initial, sc.horizon, tol);
    std::vector<double> times{0.0};
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        const auto& e = log.events[i];
        const double start = times.back();
        const double next_gap =
            (i + 1 < log.events.size() ? log.events[i + 1].time : sc.horizon) - e.time;
        double margin = next_gap;
        const Configuration at_start = log.state_at(start);
        for (std::size_t drop : {e.i, e.k}) {
            auto loo = detail::drop_particle(at_start, drop);
            const double T = detail::first_collision_time(loo, sc.horizon - start, tol);
            margin = std::min(margin, T - (e.time - start));
        }
        margin *= 0.5;
        if (!(margin >= tol.partition_margin * sc.horizon))
            throw invalid_partition_error(
                "partition: margin " + std::to_string(margin) + " after collision " +
                std::to_string(i) + " is below the threshold");
        times.push_back(e.time + margin);
    }
    times.push_back(sc.horizon);
    verify_partition(sc, times);
    return times;
}

//! Throws unless the scenario's own run is incident-free over the horizon and
//! any stored partition re-verifies.
inline void validate_scenario(const Scenario& sc) {
    auto result = classify(sc.initial, sc.horizon, sc.tolerances);
    if (!result.good()) {
        const auto& rep = result.full_report();
        throw pathology_error("scenario: configuration is not pathology-free", rep);
    }
    if (!sc.partition.empty()) verify_partition(sc, sc.partition);
}

//! Two spheres on a collision course in the z=0 plane: sphere 0 at the origin
//! moving with `speed` along x, sphere 1 at rest, offset by gap + epsilon
//! ahead and by the impact parameter across. Head-on (impact parameter 0) the
//! contact comes at exactly gap/speed. The horizon is twice the contact time,
//! so the collision sits mid-run; the partition is built and stored.
inline Scenario build_two_sphere(double gap, double speed, double impact_parameter,
                                 double epsilon, Tolerances tol = {}) {
    if (!(gap > 0.0) || !(speed > 0.0) || !(epsilon > 0.0) || impact_parameter < 0.0)
        throw invalid_input_error("two-sphere: gap, speed, epsilon must be positive");
    if (impact_parameter >= epsilon)
        throw invalid_input_error(
            "two-sphere: impact parameter at or beyond the diameter misses or grazes");
    Scenario sc;
    sc.tolerances = tol;
    sc.initial.epsilon = epsilon;
    sc.initial.particles = {{{0, 0, 0}, {speed, 0, 0}},
                            {{gap + epsilon, impact_parameter, 0}, {0, 0, 0}}};
    auto s = contact_time(sc.initial[0], sc.initial[1], epsilon, tol);
    if (!s) throw invalid_input_error("two-sphere: parameters do not produce a contact");
    sc.horizon = 2.0 * *s;
    try {
        auto log = evolve(sc.initial, sc.horizon, tol);
        if (log.events.size() != 1)
            throw invalid_input_error("two-sphere: expected exactly one collision");
        validate_scenario(sc);
    } catch (const pathology_error&) {
        throw invalid_input_error("two-sphere: grazing-course parameters");
    }
    sc.partition = build_partition(sc);
    return sc;
}

//! Appends a non-interfering sphere to a scenario. The enlarged run must
//! reproduce the original event sequence exactly and stay pathology-free.
inline Scenario with_spectator(Scenario sc, const ParticleState& spectator,
                               bool rebuild_partition = true) {
    auto before = evolve(sc.initial, sc.horizon, sc.tolerances);
    sc.initial.particles.push_back(spectator);
    try {
        auto after = evolve(sc.initial, sc.horizon, sc.tolerances);
        if (after.events.size() != before.events.size())
            throw invalid_input_error("spectator: changes the collision sequence");
        for (std::size_t e = 0; e < after.events.size(); ++e)
            if (after.events[e].i != before.events[e].i ||
                after.events[e].k != before.events[e].k ||
                std::fabs(after.events[e].time - before.events[e].time) > 1e-12)
                throw invalid_input_error("spectator: changes the collision sequence");
        validate_scenario(sc);
    } catch (const pathology_error&) {
        throw invalid_input_error("spectator: introduces a pathology");
    }
    sc.partition.clear();
    if (rebuild_partition) sc.partition = build_partition(sc);
    return sc;
}

namespace detail {

inline void check_target(const CollisionSequenceTarget& target, int& n_out) {
    if (target.empty()) throw invalid_input_error("sequence search: empty target");
    int n = 0;
    for (auto [a, b] : target) {
        if (a < 1 || b < 1 || a == b)
            throw invalid_input_error("sequence search: pairs must name two distinct spheres");
        n = std::max({n, a, b});
    }
    if (n < 2 || n > 8) throw invalid_input_error("sequence search: particle count out of range");
    n_out = n;
}

inline bool event_matches(const CollisionEvent& e, const std::pair<int, int>& p) {
    const int a = static_cast<int>(e.i) + 1;
    const int b = static_cast<int>(e.k) + 1;
    return (a == p.first && b == p.second) || (a == p.second && b == p.first);
}

// Matched-prefix length plus a staged bonus for the next wanted contact,
// evaluated from the state right after the matched prefix. Stages, strictly
// ordered so the climb cannot trade a later stage for an earlier one:
//   * pair on a collision course (0.45, 0.9]: rewards shrinking the deficit
//     by which the scheduled contact trails the window end (the next
//     interfering event, or the horizon);
//   * approaching but missing (0.25, 0.45): rewards shrinking the miss
//     distance toward the diameter;
//   * receding (0, 0.2]: rewards slowing the recession rate — being freshly
//     post-collision close scores almost nothing, which keeps the climb from
//     compressing the matched events into a degenerate burst.
// A full match scores target size + 1; a pathological run scores -1.
inline double sequence_score(const TrajectoryLog& log, const CollisionSequenceTarget& target,
                             const Tolerances& tol) {
    const double epsilon = log.initial.epsilon;
    std::size_t p = 0;
    while (p < target.size() && p < log.events.size() &&
           event_matches(log.events[p], target[p]))
        ++p;
    if (p == target.size()) return static_cast<double>(p) + 1.0;

    const double from = p == 0 ? 0.0 : log.events[p - 1].time;
    const double until = p < log.events.size() ? log.events[p].time : log.horizon;
    const Configuration at = log.state_at(from);
    const std::size_t a = static_cast<std::size_t>(target[p].first) - 1;
    const std::size_t b = static_cast<std::size_t>(target[p].second) - 1;
    auto scheduled = contact_time(at[a], at[b], epsilon, tol);
    if (scheduled) {
        const double deficit = std::max(from + *scheduled - until, 0.0);
        return static_cast<double>(p) + 0.45 + 0.45 / (1.0 + deficit);
    }
    const Vec3 dx = at[a].x - at[b].x;
    const Vec3 dv = at[a].v - at[b].v;
    const double dist = norm(dx);
    const double rate = dist > 0.0 ? dot(dx, dv) / dist : 0.0;
    if (rate >= 0.0) return static_cast<double>(p) + 0.2 / (1.0 + rate);
    const double s = -dot(dx, dv) / norm2(dv);
    const double miss = norm(dx + dv * s);  // > epsilon, else a contact existed
    return static_cast<double>(p) + 0.25 + 0.2 * epsilon / miss;
}

// The search works from the state AT the middle collision's contact: the
// pivot pair sits at exactly one diameter and the scatter rule splits the
// sampled velocities into the incoming and outgoing sides, so the pivot
// event itself holds by construction. Only the events before the pivot
// (reversed, in the backward run) and after it (in the forward run) remain
// to be matched, which keeps every chain the climb must thread short.
struct PivotTarget {
    std::pair<int, int> pivot;         // 1-based pair of the anchored event
    CollisionSequenceTarget backward;  // events before the pivot, reversed
    CollisionSequenceTarget forward;   // events after the pivot

    explicit PivotTarget(const CollisionSequenceTarget& target) {
        const std::size_t m = (target.size() - 1) / 2;
        pivot = target[m];
        for (std::size_t i = m; i-- > 0;) backward.push_back(target[i]);
        for (std::size_t i = m + 1; i < target.size(); ++i) forward.push_back(target[i]);
    }
};

struct PivotBuild {
    Configuration pre;   // touching, approaching
    Configuration post;  // touching, separating
    double kernel = 0.0; // normal closing speed at the pivot contact
};

// Realizes the pivot contact from free parameters: particle b is placed one
// diameter from particle a along the contact normal, and whichever side of
// the velocity-exchange involution is incoming becomes `pre`.
inline std::optional<PivotBuild> build_pivot(const Configuration& base, double phi,
                                             std::size_t a, std::size_t b) {
    const double eps = base.epsilon;
    Configuration pre = base;
    pre[b].x = pre[a].x + Vec3{eps * std::cos(phi), eps * std::sin(phi), 0.0};
    const Vec3 omega = (pre[a].x - pre[b].x) / eps;
    const double beta = dot(omega, pre[a].v - pre[b].v);
    if (beta == 0.0) return std::nullopt;
    Configuration post = pre;
    post[a].v = pre[a].v - omega * beta;
    post[b].v = pre[b].v + omega * beta;
    PivotBuild out;
    out.kernel = std::abs(beta);
    if (beta < 0.0) {
        out.pre = std::move(pre);
        out.post = std::move(post);
    } else {
        out.pre = std::move(post);
        out.post = std::move(pre);
    }
    return out;
}

struct SideScores {
    double back = -1.0;
    double fwd = -1.0;

    double total() const { return back + fwd; }
};

inline SideScores pivot_scores(const PivotBuild& pb, double span, const PivotTarget& pt,
                               const Tolerances& tol) {
    SideScores s;
    try {
        s.back = pt.backward.empty()
                     ? 1.0
                     : sequence_score(evolve(BackwardLog::reverse(pb.pre), span, tol),
                                      pt.backward, tol);
        s.fwd = pt.forward.empty()
                    ? 1.0
                    : sequence_score(evolve(pb.post, span, tol), pt.forward, tol);
    } catch (const error&) {
        return {};
    }
    return s;
}

// Boundary time just past event `index` of a log: halfway to the next event,
// or a unit of slack capped by the horizon.
inline double cropped_after(const TrajectoryLog& log, std::size_t index) {
    const double t = log.events[index].time;
    const double next =
        index + 1 < log.events.size() ? log.events[index + 1].time : std::min(log.horizon, t + 2.0);
    return t + 0.5 * (next - t);
}

// Conditioning of a matching run: the smallest collision kernel, the smallest
// separation between consecutive event times (counting the start and the
// horizon), and the closest non-contact approach of any pair outside a window
// around that pair's own collisions. The combined score is the bottleneck of
// the three on a common scale.
struct ScenarioQuality {
    double min_kernel = 1e300;
    double min_tsep = 1e300;
    double min_gap_margin = 1e300;

    double score() const { return std::min({min_kernel, 2.0 * min_tsep, 4.0 * min_gap_margin}); }
};

inline ScenarioQuality measure_quality(const TrajectoryLog& log) {
    ScenarioQuality q;
    const double eps = log.initial.epsilon;
    double prev = 0.0;
    for (const auto& e : log.events) {
        q.min_kernel = std::min(q.min_kernel, std::fabs(dot(e.omega, e.vi_before - e.vk_before)));
        q.min_tsep = std::min(q.min_tsep, e.time - prev);
        prev = e.time;
    }
    q.min_tsep = std::min(q.min_tsep, log.horizon - prev);
    const int samples = 600;
    for (int g = 0; g <= samples; ++g) {
        const double s = log.horizon * g / samples;
        const Configuration c = log.state_at(s);
        for (std::size_t i = 0; i + 1 < c.size(); ++i)
            for (std::size_t k = i + 1; k < c.size(); ++k) {
                bool near_own_event = false;
                for (const auto& e : log.events)
                    if (e.i == i && e.k == k && std::fabs(e.time - s) < 0.04 * log.horizon)
                        near_own_event = true;
                if (!near_own_event)
                    q.min_gap_margin = std::min(q.min_gap_margin, norm(c[i].x - c[k].x) - eps);
            }
    }
    return q;
}

inline bool log_matches(const TrajectoryLog& log, const CollisionSequenceTarget& target) {
    if (log.events.size() != target.size()) return false;
    for (std::size_t e = 0; e < target.size(); ++e)
        if (!event_matches(log.events[e], target[e])) return false;
    return true;
}

// Deterministic margin polish of a found scenario: a strict hill climb on the
// bottleneck quality score over jitters of the initial data, rejecting any
// move that changes the event sequence. Keeps every validity property of the
// input (the polished candidate is re-validated; on failure the input wins).
inline Scenario polish_margins(const Scenario& found, const CollisionSequenceTarget& target,
                               std::uint64_t seed, std::uint64_t index) {
    auto rng = substream(seed, "margin-polish", index);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Tolerances& tol = found.tolerances;

    Configuration cur = found.initial;
    double cur_score = measure_quality(evolve(cur, found.horizon, tol)).score();
    double step = 0.12;
    int stale = 0;
    for (int iter = 0; iter < 5000; ++iter) {
        Configuration cand = cur;
        for (auto& p : cand.particles) {
            p.x.x += step * gauss(rng);
            p.x.y += step * gauss(rng);
            p.v.x += 0.6 * step * gauss(rng);
            p.v.y += 0.6 * step * gauss(rng);
        }
        double cand_score = -1.0;
        try {
            auto log = evolve(cand, found.horizon, tol);
            if (log_matches(log, target)) cand_score = measure_quality(log).score();
        } catch (const error&) {
        }
        if (cand_score > cur_score) {
            cur = std::move(cand);
            cur_score = cand_score;
            stale = 0;
        } else if (++stale > 150) {
            step = std::max(step * 0.75, 2e-3);
            stale = 0;
        }
    }

    Scenario polished = found;
    polished.initial = cur;
    polished.partition.clear();
    try {
        validate_scenario(polished);
        if (!classify(polished.initial, polished.horizon, tol).hereditarily_good())
            return found;
        polished.partition = build_partition(polished);
    } catch (const error&) {
        return found;
    }
    return polished;
}

}  // namespace detail

//! Seeded randomized search for an initial configuration whose event sequence
//! equals the target. The search anneals a state anchored AT the middle
//! event's contact — that collision holds by construction — until the
//! backward run delivers the (reversed) earlier events and the forward run
//! the later ones, then reconstructs the initial configuration by backward
//! evolution; it runs in the z=0 plane (any realizable sequence of this size
//! embeds there). Restarts use independent seed streams and run concurrently;
//! the lowest-index success wins, so the result depends only on (target,
//! seed, budget). Throws not_found_error on budget exhaustion.
inline Scenario search_collision_sequence(const CollisionSequenceTarget& target,
                                          std::uint64_t seed, std::size_t budget = 200000) {
    int n = 0;
    detail::check_target(target, n);
    const double epsilon = 1.0;
    const double span = 8.0;  // per-side simulation horizon
    Tolerances tol;
    const detail::PivotTarget pt(target);
    const std::size_t pa = static_cast<std::size_t>(pt.pivot.first) - 1;
    const std::size_t pb = static_cast<std::size_t>(pt.pivot.second) - 1;
    const double complete = static_cast<double>(target.size()) + 1.0;

    const std::size_t per_restart = 1500 + 1500 * target.size();
    const std::size_t restarts = std::max<std::size_t>(1, budget / per_restart);

    // Rebuilds the scenario from a matching pivot state: step back past the
    // pre-pivot events, re-run the whole window, and insist on an exact
    // sequence match plus a hereditarily pathology-free classification and a
    // valid partition.
    auto finalize = [&](const detail::PivotBuild& pib) -> Scenario {
        auto crop = [&](const Configuration& start,
                        const CollisionSequenceTarget& side) -> double {
            auto log = evolve(start, span, tol);
            if (!side.empty()) return detail::cropped_after(log, side.size() - 1);
            // free-flight slack around the pivot, short of any stray event
            double slack = 0.35;
            if (!log.events.empty()) slack = std::min(slack, 0.5 * log.events.front().time);
            return slack;
        };
        const Configuration rev = BackwardLog::reverse(pib.pre);
        const double back_time = crop(rev, pt.backward);
        const Configuration initial =
            BackwardLog::reverse(evolve(rev, span, tol).state_at(back_time));
        Scenario sc;
        sc.initial = initial;
        sc.horizon = back_time + crop(pib.post, pt.forward);
        sc.tolerances = tol;
        sc.seed = seed;
        auto log = evolve(sc.initial, sc.horizon, tol);
        if (log.events.size() != target.size())
            throw invalid_input_error("sequence search: reconstruction mismatch");
        for (std::size_t e = 0; e < target.size(); ++e)
            if (!detail::event_matches(log.events[e], target[e]))
                throw invalid_input_error("sequence search: reconstruction mismatch");
        validate_scenario(sc);
        if (!classify(sc.initial, sc.horizon, tol).hereditarily_good())
            throw invalid_input_error("sequence search: subset pathology");
        sc.partition = build_partition(sc);
        return sc;
    };

    auto attempt = [&](std::size_t r) -> std::optional<Scenario> {
        auto rng = substream(seed, "scenario-search", r);
        std::uniform_real_distribution<double> upos(-4.0, 4.0);
        std::uniform_real_distribution<double> uangle(0.0, 2.0 * std::numbers::pi);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        // Clearance for every pair except the anchored contact itself, plus
        // a non-grazing pivot kernel so the anchored collision stays real.
        auto admissible = [&](const detail::PivotBuild& pib) {
            if (pib.kernel < 1e-3) return false;
            const auto& ps = pib.pre.particles;
            for (std::size_t i = 0; i < ps.size(); ++i)
                for (std::size_t k = i + 1; k < ps.size(); ++k) {
                    if (i == std::min(pa, pb) && k == std::max(pa, pb)) continue;
                    if (norm(ps[i].x - ps[k].x) <= epsilon * 1.05) return false;
                }
            return true;
        };

        Configuration cur;
        cur.epsilon = epsilon;
        double cur_phi = 0.0;
        std::optional<detail::PivotBuild> built;
        for (int tries = 0; tries < 200 && !built; ++tries) {
            cur.particles.clear();
            for (int i = 0; i < n; ++i)
                cur.particles.push_back(
                    {{upos(rng), upos(rng), 0.0}, {1.2 * gauss(rng), 1.2 * gauss(rng), 0.0}});
            cur_phi = uangle(rng);
            auto b = detail::build_pivot(cur, cur_phi, pa, pb);
            if (b && admissible(*b)) built = std::move(b);
        }
        if (!built) return std::nullopt;

        const double back_full = static_cast<double>(pt.backward.size()) + 1.0;
        const double fwd_full = static_cast<double>(pt.forward.size()) + 1.0;
        detail::SideScores cur_s = detail::pivot_scores(*built, span, pt, tol);
        // 0: joint annealed climb. Once one side fully matches, moves that
        // break it are rejected outright and only the other side anneals:
        // the walk then explores the completed side's level set, where the
        // remaining events can bind without trading away finished ones.
        int anchor = 0;
        double step = 0.35;
        int stale = 0;
        for (std::size_t iter = 0; iter < per_restart; ++iter) {
            if (cur_s.total() >= complete) {
                try {
                    return finalize(*built);
                } catch (const error&) {
                    cur_s = {};  // poisoned optimum; keep moving
                }
            }
            if (anchor == 0) {
                if (cur_s.back == back_full)
                    anchor = 1;
                else if (cur_s.fwd == fwd_full)
                    anchor = 2;
            }
            Configuration cand = cur;
            double cand_phi = cur_phi;
            // Alternate move kinds: full jitter, a single particle, or
            // velocities only. Small targeted moves extend a matched prefix
            // without shaking the already-matched bounces apart.
            const int mode = static_cast<int>(iter % 3);
            const std::size_t lucky =
                static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
            for (std::size_t i = 0; i < cand.particles.size(); ++i) {
                if (mode == 1 && i != lucky) continue;
                auto& p = cand.particles[i];
                if (mode != 2) {
                    p.x.x += step * gauss(rng);
                    p.x.y += step * gauss(rng);
                }
                p.v.x += 0.6 * step * gauss(rng);
                p.v.y += 0.6 * step * gauss(rng);
            }
            if (mode != 2) cand_phi += 0.5 * step * gauss(rng);
            auto cb = detail::build_pivot(cand, cand_phi, pa, pb);
            if (!cb || !admissible(*cb)) continue;
            const detail::SideScores s = detail::pivot_scores(*cb, span, pt, tol);
            if (anchor == 1 && s.back != back_full) continue;
            if (anchor == 2 && s.fwd != fwd_full) continue;
            const double gauge = anchor == 1 ? s.fwd : anchor == 2 ? s.back : s.total();
            const double cur_gauge =
                anchor == 1 ? cur_s.fwd : anchor == 2 ? cur_s.back : cur_s.total();
            // Annealed acceptance: downhill moves pass with a tolerance tied
            // to the current step, so plateaus drift instead of stalling.
            const double temp = 0.06 * step / 0.35;
            if (gauge > cur_gauge - temp * (-std::log(1.0 - unit(rng)))) {
                if (gauge > cur_gauge) stale = 0;
                cur = cand;
                cur_phi = cand_phi;
                built = std::move(cb);
                cur_s = s;
            }
            if (++stale > 150) {
                step = std::max(step * 0.8, 0.02);
                stale = 0;
            }
        }
        return std::nullopt;
    };

    const std::size_t wave = worker_count();
    for (std::size_t base = 0; base < restarts; base += wave) {
        const std::size_t count = std::min(wave, restarts - base);
        std::vector<std::optional<Scenario>> found(count);
        parallel_for(count, [&](std::size_t w) { found[w] = attempt(base + w); });
        for (std::size_t w = 0; w < count; ++w)
            if (found[w]) return detail::polish_margins(*found[w], target, seed, base + w);
    }
    throw not_found_error("sequence search: budget exhausted without a match");
}

}  // namespace hsh
