#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hsh/dynamics.hpp"
#include "hsh/empirical.hpp"
#include "hsh/flows.hpp"
#include "hsh/io.hpp"
#include "hsh/observable.hpp"
#include "hsh/rational.hpp"
#include "hsh/rng.hpp"
#include "hsh/scenarios.hpp"
#include "hsh/trees.hpp"

namespace hsh {

//! One evaluated branch of one expansion term. Injection entries are particle
//! indices (0-based); tree progenitors keep the 1-based slot syntax of the
//! tree literal. The weight is the collision-number prefactor divided by the
//! comb normalization, which telescopes to (N-j)!/N! for every term.
struct TermRow {
    int n = 0;
    Tree tree;
    SignVector signs;
    std::vector<std::size_t> injection;
    int branch = 0;
    std::string choice_path;
    int sign = +1;  // product of the creation signs
    Rational weight;
    double phi_value = 0.0;
    Configuration endpoint;  // the j surviving particles at the horizon
    bool sign_consistent = true;
};

//! Every row of one expansion evaluation, in canonical order: creation count,
//! then tree (lexicographic), then signs (all-plus first), then injection
//! (lexicographic), then branch.
struct TermLedger {
    int particle_count = 0;
    int order = 1;
    double horizon = 0.0;
    std::vector<TermRow> rows;

    //! Exact signed weight sum; equals one when the observable is constant.
    Rational signed_weight() const {
        Rational t = Rational::integer(0);
        for (const auto& r : rows) t = t + (r.sign > 0 ? r.weight : -r.weight);
        return t;
    }

    std::size_t rows_with_creations(int n_min) const {
        std::size_t c = 0;
        for (const auto& r : rows)
            if (r.n >= n_min) ++c;
        return c;
    }

    //! Signed contribution per creation count, in float.
    std::vector<double> subtotals() const {
        int top = 0;
        for (const auto& r : rows) top = std::max(top, r.n);
        std::vector<double> out(static_cast<std::size_t>(top) + 1, 0.0);
        for (const auto& r : rows)
            out[static_cast<std::size_t>(r.n)] += r.sign * r.weight.value() * r.phi_value;
        return out;
    }
};

struct HierarchyValue {
    double value = 0.0;
    TermLedger ledger;
};

namespace detail {

inline std::string injection_str(const std::vector<std::size_t>& labels) {
    std::string s = "(";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(labels[i]);
    }
    return s + ")";
}

}  // namespace detail

//! The expansion of the j-particle marginal at the horizon in terms of the
//! initial data: sum over creation count n <= n_max, collision trees, sign
//! vectors and ordered injections of j+n distinct particle indices, one row
//! per decision path of the interacting forward flow. A pathology inside any
//! term is rethrown naming the term.
inline HierarchyValue bbgky_rhs(const Scenario& sc, int j, const Observable& phi, int n_max) {
    const int N = static_cast<int>(sc.initial.size());
    if (j < 1 || j > N) throw invalid_input_error("hierarchy: order out of range");
    if (phi.order != j) throw invalid_input_error("hierarchy: observable order mismatch");
    if (n_max < 0) throw invalid_input_error("hierarchy: negative depth");

    HierarchyValue out;
    out.ledger.particle_count = N;
    out.ledger.order = j;
    out.ledger.horizon = sc.horizon;

    for (int n = 0; n <= std::min(n_max, N - j); ++n) {
        const Rational weight(falling_factorial(N - j, n), falling_factorial(N, j + n));
        for (const Tree& tree : enumerate_trees(j, n)) {
            for (const SignVector& signs : enumerate_signs(n)) {
                const int sgn = sign_product(signs);
                detail::for_each_injection(
                    sc.initial.size(), static_cast<std::size_t>(j + n),
                    [&](const std::vector<std::size_t>& labels) {
                        Configuration start;
                        start.epsilon = sc.initial.epsilon;
                        for (std::size_t l : labels) start.particles.push_back(sc.initial[l]);
                        std::vector<BranchOutcome> branches;
                        if (sc.horizon > 0.0) {
                            try {
                                branches = iff_branches(tree, signs, start, sc.horizon,
                                                        sc.tolerances);
                            } catch (const pathology_error& e) {
                                throw pathology_error("hierarchy term " + format_tree(tree, signs) +
                                                          " at " + detail::injection_str(labels) +
                                                          ": " + e.what(),
                                                      e.report);
                            } catch (const runaway_error& e) {
                                throw runaway_error("hierarchy term " + format_tree(tree, signs) +
                                                    " at " + detail::injection_str(labels) + ": " +
                                                    e.what());
                            }
                        } else if (n == 0) {
                            // Zero horizon: the identity; terms with creations
                            // have empty time simplices.
                            branches.push_back({start, "", {}, true});
                        }
                        for (std::size_t b = 0; b < branches.size(); ++b) {
                            TermRow row;
                            row.n = n;
                            row.tree = tree;
                            row.signs = signs;
                            row.injection = labels;
                            row.branch = static_cast<int>(b);
                            row.choice_path = branches[b].choice_path;
                            row.sign = sgn;
                            row.weight = weight;
                            row.phi_value = phi(branches[b].endpoint.particles);
                            row.endpoint = branches[b].endpoint;
                            row.sign_consistent = branches[b].sign_consistent;
                            out.value += sgn * weight.value() * row.phi_value;
                            out.ledger.rows.push_back(std::move(row));
                        }
                    });
            }
        }
    }
    return out;
}

//! The j-particle empirical marginal of the evolved configuration.
inline DiracComb evolved_marginal(const Scenario& sc, int j) {
    const Configuration end = sc.horizon > 0.0
                                  ? evolve(sc.initial, sc.horizon, sc.tolerances).final_state
                                  : sc.initial;
    return marginal(end, j);
}

struct TheoremCheck {
    double rhs = 0.0;
    double lhs = 0.0;
    double residual = 0.0;
    double scale = 1.0;
    bool pass = false;
    TermLedger ledger;
};

//! Expansion value against the integral of the observable over the evolved
//! marginal; the residual bound is relative to max(1, |lhs|).
inline TheoremCheck verify_theorem(const Scenario& sc, int j, const Observable& phi, int n_max) {
    TheoremCheck out;
    HierarchyValue rhs = bbgky_rhs(sc, j, phi, n_max);
    out.rhs = rhs.value;
    out.ledger = std::move(rhs.ledger);
    out.lhs = integrate(evolved_marginal(sc, j), phi);
    out.scale = std::max(1.0, std::fabs(out.lhs));
    out.residual = std::fabs(out.rhs - out.lhs);
    out.pass = out.residual <= sc.tolerances.theorem_residual * out.scale;
    return out;
}

struct IntervalTerm {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double rhs = 0.0;
    double lhs = 0.0;
    double residual = 0.0;
    TermLedger ledger;
};

struct SemigroupCheck {
    std::vector<IntervalTerm> intervals;
    double max_residual = 0.0;
    double direct = 0.0;  // integral over the full-horizon marginal
    bool pass = false;
};

//! Interval-by-interval evaluation over the scenario's partition: each
//! interval's expansion starts from the simulated configuration at the
//! interval's left boundary and must reproduce the marginal at its right
//! boundary; the last interval's target is the full-horizon marginal. Depth
//! is always N - j, so the single-collision structure of the intervals shows
//! up as an exact absence of multi-creation rows.
inline SemigroupCheck compose_semigroup(const Scenario& sc, int j, const Observable& phi) {
    std::vector<double> times = sc.partition.empty() ? build_partition(sc) : sc.partition;
    verify_partition(sc, times);
    const int N = static_cast<int>(sc.initial.size());
    const TrajectoryLog log = evolve(sc.initial, sc.horizon, sc.tolerances);

    SemigroupCheck out;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        Scenario piece;
        piece.initial = log.state_at(times[i]);
        piece.horizon = times[i + 1] - times[i];
        piece.tolerances = sc.tolerances;
        piece.seed = sc.seed;

        IntervalTerm term;
        term.t_lo = times[i];
        term.t_hi = times[i + 1];
        HierarchyValue rhs = bbgky_rhs(piece, j, phi, N - j);
        term.rhs = rhs.value;
        term.ledger = std::move(rhs.ledger);
        term.lhs = integrate(marginal(log.state_at(times[i + 1]), j), phi);
        term.residual = std::fabs(term.rhs - term.lhs);
        out.max_residual = std::max(out.max_residual, term.residual);
        out.intervals.push_back(std::move(term));
    }
    out.direct = integrate(marginal(log.final_state, j), phi);
    out.pass = out.max_residual <= sc.tolerances.composed_semigroup;
    return out;
}

//! Separation of two equal-order phase points: the largest position or
//! velocity distance over the slots.
inline double endpoint_distance(const Configuration& a, const Configuration& b) {
    if (a.size() != b.size()) throw invalid_input_error("endpoint_distance: order mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, norm(a[i].x - b[i].x));
        d = std::max(d, norm(a[i].v - b[i].v));
    }
    return d;
}

struct AuditPairing {
    std::size_t negative_row = 0;
    std::size_t positive_row = 0;
    double separation = 0.0;
    bool virtual_pair = false;  // the cancelled endpoint is not a true atom
};

struct AuditReport {
    std::vector<AuditPairing> pairings;
    std::vector<std::size_t> real_rows;  // positive rows matching a true atom
    std::vector<std::size_t> atom_hits;  // surviving-row count per true atom
    std::vector<std::size_t> unmatched_positive;
    std::vector<std::size_t> unmatched_negative;

    bool clean() const { return unmatched_positive.empty() && unmatched_negative.empty(); }
};

//! Greedy cancellation matching: every negative row must find an unconsumed
//! positive row of equal weight with the same endpoint; candidates sharing
//! the negative row's tree are preferred, then canonical order decides. The
//! surviving positive rows must each sit on an atom of the true marginal.
inline AuditReport cancellation_audit(const TermLedger& ledger, const DiracComb& truth,
                                      const Tolerances& tol = {}) {
    if (truth.order != ledger.order) throw invalid_input_error("audit: marginal order mismatch");
    AuditReport out;
    out.atom_hits.assign(truth.atoms.size(), 0);

    auto atom_of = [&](const Configuration& end) -> std::ptrdiff_t {
        for (std::size_t a = 0; a < truth.atoms.size(); ++a) {
            Configuration pt;
            pt.epsilon = end.epsilon;
            pt.particles = truth.atoms[a].point;
            if (endpoint_distance(end, pt) <= tol.audit_match)
                return static_cast<std::ptrdiff_t>(a);
        }
        return -1;
    };

    std::vector<bool> consumed(ledger.rows.size(), false);
    auto same_tree = [&](std::size_t a, std::size_t b) {
        return ledger.rows[a].tree.k == ledger.rows[b].tree.k;
    };
    for (std::size_t r = 0; r < ledger.rows.size(); ++r) {
        if (ledger.rows[r].sign > 0) continue;
        std::ptrdiff_t pick = -1;
        for (int pass = 0; pass < 2 && pick < 0; ++pass) {
            for (std::size_t p = 0; p < ledger.rows.size(); ++p) {
                if (ledger.rows[p].sign < 0 || consumed[p]) continue;
                if (pass == 0 && !same_tree(r, p)) continue;
                if (!(ledger.rows[p].weight == ledger.rows[r].weight)) continue;
                if (endpoint_distance(ledger.rows[p].endpoint, ledger.rows[r].endpoint) >
                    tol.audit_match)
                    continue;
                pick = static_cast<std::ptrdiff_t>(p);
                break;
            }
        }
        if (pick < 0) {
            out.unmatched_negative.push_back(r);
            continue;
        }
        consumed[static_cast<std::size_t>(pick)] = true;
        AuditPairing pairing;
        pairing.negative_row = r;
        pairing.positive_row = static_cast<std::size_t>(pick);
        pairing.separation = endpoint_distance(ledger.rows[r].endpoint,
                                               ledger.rows[static_cast<std::size_t>(pick)].endpoint);
        pairing.virtual_pair = atom_of(ledger.rows[r].endpoint) < 0;
        out.pairings.push_back(pairing);
    }
    for (std::size_t p = 0; p < ledger.rows.size(); ++p) {
        if (ledger.rows[p].sign < 0 || consumed[p]) continue;
        const std::ptrdiff_t a = atom_of(ledger.rows[p].endpoint);
        if (a < 0) {
            out.unmatched_positive.push_back(p);
        } else {
            out.real_rows.push_back(p);
            ++out.atom_hits[static_cast<std::size_t>(a)];
        }
    }
    return out;
}

//! Gaussian cloud sampler: positions and velocities drawn coordinate-wise,
//! one independent stream per sample index. A draw that lands two spheres
//! inside contact distance is a rejection, not a redraw.
struct McSampler {
    int particle_count = 2;
    double epsilon = 0.1;
    double position_spread = 1.0;
    double velocity_spread = 1.0;

    Configuration draw(std::uint64_t seed, std::uint64_t index) const {
        auto gen = substream(seed, "mc", index);
        std::normal_distribution<double> pos(0.0, position_spread);
        std::normal_distribution<double> vel(0.0, velocity_spread);
        Configuration c;
        c.epsilon = epsilon;
        for (int i = 0; i < particle_count; ++i) {
            ParticleState p;
            p.x = {pos(gen), pos(gen), pos(gen)};
            p.v = {vel(gen), vel(gen), vel(gen)};
            c.particles.push_back(p);
        }
        return c;
    }

    bool overlapped(const Configuration& c) const {
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t k = i + 1; k < c.size(); ++k)
                if (norm(c[i].x - c[k].x) <= epsilon * (1.0 + 1e-9)) return true;
        return false;
    }
};

struct McCheck {
    double lhs_mean = 0.0;
    double rhs_mean = 0.0;
    double diff_mean = 0.0;
    double lhs_se = 0.0;
    double rhs_se = 0.0;
    double diff_se = 0.0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    bool within = false;  // |diff_mean| <= 3 diff_se, shared samples
};

//! Monte Carlo check of the expansion in expectation: the same samples feed
//! both sides, so the comparison is a paired difference. Overlapping draws
//! and pathology-hitting samples are rejected and counted; a rejection rate
//! above one half is a sampler mismatch.
inline McCheck corollary_mc(const McSampler& sampler, int j, const Observable& phi, double t,
                            int n_max, std::size_t samples, std::uint64_t seed,
                            const Tolerances& tol = {}) {
    if (samples < 2) throw invalid_input_error("corollary_mc: need at least two samples");
    std::vector<double> lhs_vals, rhs_vals;
    lhs_vals.reserve(samples);
    rhs_vals.reserve(samples);
    McCheck out;
    for (std::uint64_t index = 0; index < samples; ++index) {
        const Configuration c = sampler.draw(seed, index);
        if (sampler.overlapped(c)) {
            ++out.rejected;
            continue;
        }
        Scenario sc;
        sc.initial = c;
        sc.horizon = t;
        sc.tolerances = tol;
        try {
            const double lhs = integrate(evolved_marginal(sc, j), phi);
            const double rhs = bbgky_rhs(sc, j, phi, n_max).value;
            lhs_vals.push_back(lhs);
            rhs_vals.push_back(rhs);
        } catch (const pathology_error&) {
            ++out.rejected;
        } catch (const runaway_error&) {
            ++out.rejected;
        }
    }
    out.accepted = lhs_vals.size();
    if (out.rejected * 2 > samples)
        throw sampler_mismatch_error("corollary_mc: " + std::to_string(out.rejected) + " of " +
                                     std::to_string(samples) + " samples rejected");
    if (out.accepted < 2)
        throw sampler_mismatch_error("corollary_mc: too few accepted samples");

    auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size() - 1);
        se = std::sqrt(var / static_cast<double>(v.size()));
    };
    mean_se(lhs_vals, out.lhs_mean, out.lhs_se);
    mean_se(rhs_vals, out.rhs_mean, out.rhs_se);
    std::vector<double> diffs(lhs_vals.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = rhs_vals[i] - lhs_vals[i];
    mean_se(diffs, out.diff_mean, out.diff_se);
    out.within = out.diff_se > 0.0 ? std::fabs(out.diff_mean) <= 3.0 * out.diff_se
                                   : out.diff_mean == 0.0;
    return out;
}

inline Json to_json(const TermRow& row) {
    Json j;
    j["n"] = row.n;
    j["tree"] = format_tree(row.tree, row.signs);
    j["injection"] = row.injection;
    j["branch"] = row.branch;
    j["path"] = row.choice_path;
    j["sign"] = row.sign;
    j["weight"] = row.weight.str();
    j["phi"] = row.phi_value;
    Json endpoint = Json::array();
    for (const auto& p : row.endpoint.particles) {
        Json slot;
        slot["x"] = to_json(p.x);
        slot["v"] = to_json(p.v);
        endpoint.push_back(slot);
    }
    j["endpoint"] = endpoint;
    return j;
}

inline Json to_json(const TermLedger& ledger, bool include_rows) {
    Json j;
    j["particle_count"] = ledger.particle_count;
    j["order"] = ledger.order;
    j["horizon"] = ledger.horizon;
    j["row_count"] = ledger.rows.size();
    j["signed_weight"] = ledger.signed_weight().str();
    j["subtotals"] = ledger.subtotals();
    if (include_rows) {
        Json rows = Json::array();
        for (const auto& r : ledger.rows) rows.push_back(to_json(r));
        j["rows"] = rows;
    }
    return j;
}

inline Json to_json(const AuditReport& audit, const TermLedger& ledger) {
    Json j;
    Json pairings = Json::array();
    for (const auto& p : audit.pairings) {
        Json row;
        row["negative"] = to_json(ledger.rows[p.negative_row]);
        row["positive"] = to_json(ledger.rows[p.positive_row]);
        row["separation"] = p.separation;
        row["virtual"] = p.virtual_pair;
        pairings.push_back(row);
    }
    j["pairings"] = pairings;
    j["real_rows"] = audit.real_rows;
    j["atom_hits"] = audit.atom_hits;
    j["unmatched_positive"] = audit.unmatched_positive;
    j["unmatched_negative"] = audit.unmatched_negative;
    j["clean"] = audit.clean();
    return j;
}

//! Full verification report for one scenario: identity check, per-interval
//! composition, cancellation audit. Rows are included only on request; the
//! summary fields always are.
inline Json verification_report(const Scenario& sc, int j, const Observable& phi, int n_max,
                                bool include_rows = false) {
    Json j_out;
    j_out["schema_version"] = kSchemaVersion;
    j_out["scenario_hash"] = scenario_hash(sc);
    j_out["order"] = j;
    j_out["depth"] = n_max;

    const TheoremCheck theorem = verify_theorem(sc, j, phi, n_max);
    Json jt;
    jt["rhs"] = theorem.rhs;
    jt["lhs"] = theorem.lhs;
    jt["residual"] = theorem.residual;
    jt["scale"] = theorem.scale;
    jt["pass"] = theorem.pass;
    jt["ledger"] = to_json(theorem.ledger, include_rows);
    j_out["identity"] = jt;

    const AuditReport audit =
        cancellation_audit(theorem.ledger, evolved_marginal(sc, j), sc.tolerances);
    j_out["audit"] = to_json(audit, theorem.ledger);

    if (!sc.partition.empty()) {
        const SemigroupCheck composed = compose_semigroup(sc, j, phi);
        Json jc;
        jc["max_residual"] = composed.max_residual;
        jc["direct"] = composed.direct;
        jc["pass"] = composed.pass;
        Json intervals = Json::array();
        for (const auto& term : composed.intervals) {
            Json ji;
            ji["t_lo"] = term.t_lo;
            ji["t_hi"] = term.t_hi;
            ji["rhs"] = term.rhs;
            ji["lhs"] = term.lhs;
            ji["residual"] = term.residual;
            ji["multi_creation_rows"] = term.ledger.rows_with_creations(2);
            ji["ledger"] = to_json(term.ledger, include_rows);
            intervals.push_back(ji);
        }
        jc["intervals"] = intervals;
        j_out["composition"] = jc;
    }
    return j_out;
}

}  // namespace hsh
