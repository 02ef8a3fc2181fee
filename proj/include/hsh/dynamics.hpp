#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hsh/core.hpp"

namespace hsh {

//! One processed collision. `omega` points from particle k toward particle i
//! at the contact instant; velocities are recorded before and after the
//! elastic reflection. Times are elapsed since the start of the run.
struct CollisionEvent {
    double time = 0.0;
    std::size_t i = 0;
    std::size_t k = 0;
    Vec3 omega;
    Vec3 vi_before, vk_before;
    Vec3 vi_after, vk_after;
};

//! Diagnosed degeneracies of a run. A run with any incident is not a good
//! configuration for the hierarchy machinery.
struct PathologyReport {
    struct Incident {
        std::string kind;  // "grazing" | "simultaneous" | "near_triple"
        double time = 0.0;
        std::size_t i = 0;
        std::size_t k = 0;
        std::size_t third = static_cast<std::size_t>(-1);
        double value = 0.0;  // kernel value, time separation, or third-particle gap
    };
    std::vector<Incident> grazing;
    std::vector<Incident> simultaneous;
    std::vector<Incident> near_triple;

    bool empty() const { return grazing.empty() && simultaneous.empty() && near_triple.empty(); }
    std::size_t total() const { return grazing.size() + simultaneous.size() + near_triple.size(); }
};

struct pathology_error : error {
    PathologyReport report;
    pathology_error(const std::string& what_arg, PathologyReport r)
        : error(what_arg), report(std::move(r)) {}
};

//! Full record of an event-driven run: initial data, every collision, and the
//! state at the horizon. Intermediate states are reconstructed by replaying
//! the (piecewise free) motion through the logged events.
struct TrajectoryLog {
    Configuration initial;
    double horizon = 0.0;
    std::vector<CollisionEvent> events;
    Configuration final_state;

    //! State at elapsed time s in [0, horizon]. Events at exactly s count as
    //! already processed.
    Configuration state_at(double s) const {
        Configuration c = initial;
        double now = 0.0;
        for (const auto& e : events) {
            if (e.time > s) break;
            advance(c, e.time - now);
            now = e.time;
            c[e.i].v = e.vi_after;
            c[e.k].v = e.vk_after;
        }
        advance(c, s - now);
        return c;
    }

    static void advance(Configuration& c, double dt) {
        for (auto& p : c.particles) p.x += p.v * dt;
    }
};

namespace detail {

struct PendingContact {
    double s = std::numeric_limits<double>::infinity();
    std::size_t i = 0, k = 0;
};

// Core event loop. Exhaustive pair scan after every event: with desk-scale N
// the asymptotics of an event queue buy nothing. On the first pathology the
// run stops at the offending instant with the incident recorded.
inline TrajectoryLog run_events(const Configuration& start, double t, const Tolerances& tol,
                                PathologyReport& report) {
    if (!(t >= 0.0)) throw invalid_input_error("evolve: horizon must be non-negative");
    check_admissible(start, tol);
    TrajectoryLog log;
    log.initial = start;
    log.horizon = t;

    Configuration c = start;
    double now = 0.0;
    while (true) {
        const double remaining = t - now;
        std::vector<PendingContact> pending;
        for (std::size_t i = 0; i + 1 < c.size(); ++i)
            for (std::size_t k = i + 1; k < c.size(); ++k) {
                auto s = contact_time(c[i], c[k], c.epsilon, tol);
                if (s && *s <= remaining) pending.push_back({*s, i, k});
            }
        if (pending.empty()) break;
        std::sort(pending.begin(), pending.end(),
                  [](const PendingContact& a, const PendingContact& b) { return a.s < b.s; });
        const PendingContact hit = pending.front();

        if (pending.size() > 1 &&
            pending[1].s - hit.s < tol.simultaneity * (1.0 + now + hit.s)) {
            PathologyReport::Incident inc;
            inc.kind = "simultaneous";
            inc.time = now + hit.s;
            inc.i = hit.i;
            inc.k = hit.k;
            inc.third = pending[1].i == hit.i || pending[1].i == hit.k ? pending[1].k : pending[1].i;
            inc.value = pending[1].s - hit.s;
            report.simultaneous.push_back(inc);
            TrajectoryLog::advance(c, hit.s);
            now += hit.s;
            break;
        }

        TrajectoryLog::advance(c, hit.s);
        now += hit.s;
        const ContactGeometry g = contact_geometry(c, hit.i, hit.k, 0.0);

        if (is_grazing(g.approach, g.relative_velocity, tol)) {
            PathologyReport::Incident inc;
            inc.kind = "grazing";
            inc.time = now;
            inc.i = hit.i;
            inc.k = hit.k;
            inc.value = g.approach;
            report.grazing.push_back(inc);
            break;
        }

        for (std::size_t j = 0; j < c.size(); ++j) {
            if (j == hit.i || j == hit.k) continue;
            const double d = std::min(norm(c[j].x - c[hit.i].x), norm(c[j].x - c[hit.k].x));
            if (d < c.epsilon * (1.0 + tol.min_gap_slack)) {
                PathologyReport::Incident inc;
                inc.kind = "near_triple";
                inc.time = now;
                inc.i = hit.i;
                inc.k = hit.k;
                inc.third = j;
                inc.value = d - c.epsilon;
                report.near_triple.push_back(inc);
            }
        }
        if (!report.near_triple.empty()) break;

        CollisionEvent e;
        e.time = now;
        e.i = hit.i;
        e.k = hit.k;
        e.omega = g.omega;
        e.vi_before = c[hit.i].v;
        e.vk_before = c[hit.k].v;
        auto [vi, vk] = scatter(c[hit.i].v, c[hit.k].v, g.omega);
        e.vi_after = vi;
        e.vk_after = vk;
        c[hit.i].v = vi;
        c[hit.k].v = vk;
        log.events.push_back(e);
        if (static_cast<std::int64_t>(log.events.size()) > tol.event_cap)
            throw runaway_error("evolve: event cap exceeded");
    }
    if (report.empty()) TrajectoryLog::advance(c, t - now);
    log.final_state = c;
    return log;
}

}  // namespace detail

//! Evolves a configuration for time t under free flight plus elastic pair
//! reflections. Any grazing, simultaneous, or triple-proximity incident is a
//! pathology error carrying the report.
inline TrajectoryLog evolve(const Configuration& start, double t, const Tolerances& tol = {}) {
    PathologyReport report;
    TrajectoryLog log = detail::run_events(start, t, tol, report);
    if (!report.empty()) {
        const auto& inc = !report.grazing.empty()
                              ? report.grazing.front()
                              : (!report.simultaneous.empty() ? report.simultaneous.front()
                                                              : report.near_triple.front());
        std::ostringstream msg;
        msg << "evolve: " << inc.kind << " incident at t=" << inc.time << " between particles "
            << inc.i << " and " << inc.k;
        throw pathology_error(msg.str(), report);
    }
    return log;
}

//! Evolution backward in time, realized by the velocity-reversal conjugation
//! R o evolve o R. The returned log describes the auxiliary forward run of
//! the velocity-reversed configuration: event times are elapsed backward
//! time, positions and contact normals are frame-independent, velocities in
//! the log are reversed. `final_state` is converted back to the physical
//! frame, as is `state_at_backward`.
struct BackwardLog {
    TrajectoryLog reversed;  // forward log of R(start)

    Configuration final_state() const { return reverse(reversed.final_state); }
    Configuration state_at_backward(double s) const { return reverse(reversed.state_at(s)); }

    static Configuration reverse(Configuration c) {
        for (auto& p : c.particles) p.v = -p.v;
        return c;
    }
};

inline BackwardLog evolve_backward(const Configuration& start, double t,
                                   const Tolerances& tol = {}) {
    return {evolve(BackwardLog::reverse(start), t, tol)};
}

//! Number of collisions in [0, t].
inline std::size_t collision_count(const Configuration& start, double t,
                                   const Tolerances& tol = {}) {
    return evolve(start, t, tol).events.size();
}

//! Pathology classification of a configuration and its sub-configurations.
//! A configuration is good when its own run is incident-free; it is
//! hereditarily good when every subset's run is too.
struct ClassifyResult {
    struct SubsetReport {
        std::vector<std::size_t> labels;  // particle indices of the subset
        PathologyReport report;
    };
    std::vector<SubsetReport> subsets;

    bool good() const { return subsets.empty() || subsets.front().report.empty(); }
    const PathologyReport& full_report() const { return subsets.front().report; }
    bool hereditarily_good() const {
        for (const auto& s : subsets)
            if (!s.report.empty()) return false;
        return true;
    }
};

inline ClassifyResult classify(const Configuration& start, double t, const Tolerances& tol = {}) {
    if (start.size() > 16) throw invalid_input_error("classify: subset enumeration needs N <= 16");
    ClassifyResult result;
    const std::size_t n = start.size();
    std::vector<std::vector<std::size_t>> subsets;
    subsets.push_back({});
    for (std::size_t i = 0; i < n; ++i) subsets.front().push_back(i);  // full set first
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::size_t> labels;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) labels.push_back(i);
        if (labels.size() < 2 || labels.size() == n) continue;
        subsets.push_back(labels);
    }
    for (const auto& labels : subsets) {
        Configuration sub;
        sub.epsilon = start.epsilon;
        for (std::size_t i : labels) sub.particles.push_back(start[i]);
        PathologyReport report;
        detail::run_events(sub, t, tol, report);
        // Translate subset-local indices back to configuration labels.
        auto relabel = [&](PathologyReport::Incident& inc) {
            inc.i = labels[inc.i];
            inc.k = labels[inc.k];
            if (inc.third != static_cast<std::size_t>(-1)) inc.third = labels[inc.third];
        };
        for (auto& inc : report.grazing) relabel(inc);
        for (auto& inc : report.simultaneous) relabel(inc);
        for (auto& inc : report.near_triple) relabel(inc);
        result.subsets.push_back({labels, std::move(report)});
    }
    return result;
}

//! CSV export: one row per (sample time, particle), at event times plus a
//! uniform grid of `grid_points` samples. Header: time,particle,x1,x2,x3,v1,v2,v3.
inline void write_trajectory_csv(const TrajectoryLog& log, std::ostream& os,
                                 std::size_t grid_points = 65) {
    std::vector<double> times;
    for (std::size_t g = 0; g < grid_points; ++g)
        times.push_back(log.horizon * static_cast<double>(g) /
                        static_cast<double>(grid_points - 1));
    for (const auto& e : log.events) times.push_back(e.time);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    os << "time,particle,x1,x2,x3,v1,v2,v3\n";
    char buf[360];
    for (double s : times) {
        const Configuration c = log.state_at(s);
        for (std::size_t i = 0; i < c.size(); ++i) {
            std::snprintf(buf, sizeof buf,
                          "%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s, i, c[i].x.x,
                          c[i].x.y, c[i].x.z, c[i].v.x, c[i].v.y, c[i].v.z);
            os << buf;
        }
    }
}

inline void write_trajectory_csv_file(const TrajectoryLog& log, const std::string& path,
                                      std::size_t grid_points = 65) {
    std::ofstream os(path);
    if (!os) throw invalid_input_error("cannot open for writing: " + path);
    write_trajectory_csv(log, os, grid_points);
}

}  // namespace hsh
