#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "hsh/flows.hpp"
#include "hsh/io.hpp"

using namespace hsh;
using Catch::Approx;

namespace {

const std::string kGoldenPath = std::string(HSH_TEST_DATA_DIR) + "/golden_recollision.json";

double cfg_diff(const Configuration& a, const Configuration& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q)
        for (int d = 0; d < 3; ++d) {
            m = std::max(m, std::fabs(a[q].x[d] - b[q].x[d]));
            m = std::max(m, std::fabs(a[q].v[d] - b[q].v[d]));
        }
    return m;
}

double particle_diff(const ParticleState& a, const ParticleState& b) {
    double m = 0.0;
    for (int d = 0; d < 3; ++d) {
        m = std::max(m, std::fabs(a.x[d] - b.x[d]));
        m = std::max(m, std::fabs(a.v[d] - b.v[d]));
    }
    return m;
}

// Node variables that replay a logged collision as a creation: the created
// particle appears next to the surviving progenitor with its post-collision
// velocity, so the backward scatter restores the incoming pair.
Vec3 creation_omega(const CollisionEvent& e, std::size_t created) {
    return e.i == created ? e.omega : -e.omega;
}

Vec3 creation_velocity(const CollisionEvent& e, std::size_t created) {
    return e.i == created ? e.vi_after : e.vk_after;
}

}  // namespace

TEST_CASE("two-sphere collision replays as a single creation in both signs") {
    Scenario two = build_two_sphere(3.0, 2.0, 0.0, 1.0);
    TrajectoryLog log = evolve(two.initial, two.horizon, two.tolerances);
    REQUIRE(log.events.size() == 1);
    const CollisionEvent& e = log.events[0];
    const Tree tree{1, {1}};

    NodeVariables nodes;
    nodes.times = {e.time};
    nodes.omegas = {creation_omega(e, 1)};
    nodes.velocities = {creation_velocity(e, 1)};
    Configuration roots;
    roots.epsilon = 1.0;
    roots.particles = {log.final_state[0]};

    auto gain = ibf(tree, {+1}, roots, nodes, two.horizon, two.tolerances);
    CHECK(gain.constraint_satisfied);
    CHECK(gain.sign_consistent);
    CHECK(gain.recollisions.empty());
    CHECK(gain.kernel_factors[0] == Approx(2.0).margin(1e-12));
    CHECK(cfg_diff(gain.terminal, two.initial) <= 1e-12);
    // The created pair sits at distance epsilon at the creation instant.
    const Configuration& at_node = gain.segments[1].log.reversed.initial;
    REQUIRE(at_node.size() == 2);
    CHECK(std::fabs(norm(at_node[0].x - at_node[1].x) - 1.0) <= 1e-12);
    // No recollisions: the free flow reconstructs the same terminal.
    auto free_flow = ebf(tree, {+1}, roots, nodes, two.horizon, two.tolerances);
    CHECK(cfg_diff(free_flow.terminal, gain.terminal) <= 1e-13);

    // Loss row: the root ignores the collision, the partner arrives incoming.
    ParticleState ignored = two.initial[0];
    ignored.x += ignored.v * two.horizon;
    Configuration lroots;
    lroots.epsilon = 1.0;
    lroots.particles = {ignored};
    NodeVariables lnodes;
    lnodes.times = {e.time};
    lnodes.omegas = {creation_omega(e, 1)};
    lnodes.velocities = {e.i == 1 ? e.vi_before : e.vk_before};
    auto loss = ibf(tree, {-1}, lroots, lnodes, two.horizon, two.tolerances);
    CHECK(loss.sign_consistent);
    CHECK(loss.kernel_factors[0] == Approx(-2.0).margin(1e-12));
    CHECK(cfg_diff(loss.terminal, two.initial) <= 1e-12);

    // Forward: one decision path per sign.
    auto plus = iff_branches(tree, {+1}, two.initial, two.horizon, two.tolerances);
    REQUIRE(plus.size() == 1);
    CHECK(plus[0].choice_path == "C+");
    CHECK(plus[0].creation_times[0] == Approx(e.time).margin(1e-12));
    CHECK(particle_diff(plus[0].endpoint[0], roots[0]) <= 1e-12);
    auto minus = iff_branches(tree, {-1}, two.initial, two.horizon, two.tolerances);
    REQUIRE(minus.size() == 1);
    CHECK(minus[0].choice_path == "C-");
    CHECK(particle_diff(minus[0].endpoint[0], ignored) <= 1e-12);
}

TEST_CASE("golden trajectory is an exact two-creation backward reconstruction") {
    Scenario sc = load_scenario(kGoldenPath);
    TrajectoryLog log = evolve(sc.initial, sc.horizon, sc.tolerances);
    REQUIRE(log.events.size() == 4);
    const CollisionEvent& c1 = log.events[0];
    const CollisionEvent& c2 = log.events[1];
    const CollisionEvent& c3 = log.events[2];
    const CollisionEvent& c4 = log.events[3];
    const Tree tree{1, {1, 2}};

    // Last collision creates sphere 2 from the root, third creates sphere 3
    // from sphere 2; the first two collisions recur inside the backward flow.
    NodeVariables nodes;
    nodes.times = {c4.time, c3.time};
    nodes.omegas = {creation_omega(c4, 1), creation_omega(c3, 2)};
    nodes.velocities = {creation_velocity(c4, 1), creation_velocity(c3, 2)};
    Configuration roots;
    roots.epsilon = sc.initial.epsilon;
    roots.particles = {log.final_state[0]};

    auto r = ibf(tree, {+1, +1}, roots, nodes, sc.horizon, sc.tolerances);
    CHECK(r.constraint_satisfied);
    CHECK(r.sign_consistent);
    CHECK(r.kernel_factors[0] == Approx(0.192478570).margin(1e-7));
    CHECK(r.kernel_factors[1] == Approx(0.192167338).margin(1e-7));
    REQUIRE(r.recollisions.size() == 2);
    CHECK(r.recollisions[0].time == Approx(c2.time).margin(1e-9));
    CHECK(r.recollisions[0].i == 0);
    CHECK(r.recollisions[0].k == 2);
    CHECK(r.recollisions[0].kernel == Approx(-1.477943373).margin(1e-7));
    CHECK(r.recollisions[1].time == Approx(c1.time).margin(1e-9));
    CHECK(r.recollisions[1].i == 1);
    CHECK(r.recollisions[1].k == 2);
    CHECK(r.recollisions[1].kernel == Approx(-0.228804764).margin(1e-7));
    CHECK(cfg_diff(r.terminal, sc.initial) <= 1e-12);
    // Segment bookkeeping: j, j+1, j+2 spheres.
    REQUIRE(r.segments.size() == 3);
    CHECK(r.segments[0].log.reversed.initial.size() == 1);
    CHECK(r.segments[1].log.reversed.initial.size() == 2);
    CHECK(r.segments[2].log.reversed.initial.size() == 3);

    // Dropping the recollisions changes the terminal entirely.
    auto free_flow = ebf(tree, {+1, +1}, roots, nodes, sc.horizon, sc.tolerances);
    CHECK(cfg_diff(free_flow.terminal, r.terminal) > 1.0);
}

TEST_CASE("free reading of the golden datum lands on a swapped ordering") {
    Scenario sc = load_scenario(kGoldenPath);
    TrajectoryLog log = evolve(sc.initial, sc.horizon, sc.tolerances);
    const CollisionEvent& c1 = log.events[0];
    const CollisionEvent& c2 = log.events[1];
    const Tree tree{1, {1, 2}};

    // Root: sphere 1 takes the second collision and ignores the last one.
    Configuration at_c2 = log.state_at(c2.time);
    ParticleState zt = at_c2[0];
    zt.x += zt.v * (sc.horizon - c2.time);
    Configuration roots;
    roots.epsilon = sc.initial.epsilon;
    roots.particles = {zt};
    NodeVariables nodes;
    nodes.times = {c2.time, c1.time};
    nodes.omegas = {creation_omega(c2, 2), creation_omega(c1, 1)};
    nodes.velocities = {creation_velocity(c2, 2), creation_velocity(c1, 1)};

    auto r = ibf(tree, {+1, +1}, roots, nodes, sc.horizon, sc.tolerances);
    CHECK(r.constraint_satisfied);
    CHECK(r.sign_consistent);
    CHECK(r.recollisions.empty());
    CHECK(r.kernel_factors[0] == Approx(1.477943373).margin(1e-7));
    CHECK(r.kernel_factors[1] == Approx(0.228804764).margin(1e-7));
    Configuration swapped;
    swapped.epsilon = sc.initial.epsilon;
    swapped.particles = {sc.initial[0], sc.initial[2], sc.initial[1]};
    CHECK(cfg_diff(r.terminal, swapped) <= 1e-12);

    // Without recollisions the interacting and free flows coincide, and the
    // free flow inverts back to the same creation data.
    auto free_flow = ebf(tree, {+1, +1}, roots, nodes, sc.horizon, sc.tolerances);
    CHECK(cfg_diff(free_flow.terminal, r.terminal) <= 1e-13);
    auto pre = ebf_invert(tree, {+1, +1}, free_flow.terminal, sc.horizon, sc.tolerances);
    CHECK(cfg_diff(pre.roots, roots) <= 1e-12);
    for (std::size_t m = 0; m < 2; ++m) {
        CHECK(pre.nodes.times[m] == Approx(nodes.times[m]).margin(1e-12));
        for (int d = 0; d < 3; ++d) {
            CHECK(pre.nodes.omegas[m][d] == Approx(nodes.omegas[m][d]).margin(1e-12));
            CHECK(pre.nodes.velocities[m][d] == Approx(nodes.velocities[m][d]).margin(1e-12));
        }
    }
}

TEST_CASE("forward branching on the golden start is two-fold") {
    Scenario sc = load_scenario(kGoldenPath);
    const Tree tree{1, {1, 2}};
    auto branches = iff_branches(tree, {+1, +1}, sc.initial, sc.horizon, sc.tolerances);
    REQUIRE(branches.size() == 2);
    CHECK(branches[0].sign_consistent);
    CHECK(branches[1].sign_consistent);

    // One branch creates at a contact that exists only after the first
    // deletion; the other replays the trajectory's last two collisions.
    CHECK(branches[0].choice_path == "C+,C+");
    CHECK(branches[0].creation_times[0] == Approx(1.797217763182).margin(1e-8));
    CHECK(branches[0].creation_times[1] == Approx(1.161869023058).margin(1e-8));
    CHECK(branches[0].endpoint[0].x.x == Approx(-2.124787552519).margin(1e-8));
    CHECK(branches[0].endpoint[0].x.y == Approx(6.756416344043).margin(1e-8));
    CHECK(branches[0].endpoint[0].v.x == Approx(-0.390563726811).margin(1e-8));
    CHECK(branches[0].endpoint[0].v.y == Approx(0.975925905528).margin(1e-8));

    CHECK(branches[1].choice_path == "R,C+,C+");
    CHECK(branches[1].creation_times[0] == Approx(5.136892250094).margin(1e-8));
    CHECK(branches[1].creation_times[1] == Approx(1.394427415182).margin(1e-8));
    TrajectoryLog log = evolve(sc.initial, sc.horizon, sc.tolerances);
    CHECK(particle_diff(branches[1].endpoint[0], log.final_state[0]) <= 1e-12);

    double sep = 0.0;
    for (int d = 0; d < 3; ++d)
        sep += (branches[0].endpoint[0].x[d] - branches[1].endpoint[0].x[d]) *
               (branches[0].endpoint[0].x[d] - branches[1].endpoint[0].x[d]);
    CHECK(std::sqrt(sep) > 1e-6);
}

TEST_CASE("branch counts across datum orderings") {
    Scenario sc = load_scenario(kGoldenPath);
    const Tree tree{1, {1, 2}};
    auto ordered = [&](int a, int b, int c) {
        Configuration start;
        start.epsilon = sc.initial.epsilon;
        start.particles = {sc.initial[std::size_t(a)], sc.initial[std::size_t(b)],
                           sc.initial[std::size_t(c)]};
        return iff_branches(tree, {+1, +1}, start, sc.horizon, sc.tolerances);
    };
    CHECK(ordered(0, 1, 2).size() == 2);
    CHECK(ordered(0, 2, 1).size() == 1);
    CHECK(ordered(1, 0, 2).size() == 1);
    CHECK(ordered(1, 2, 0).size() == 1);
    CHECK(ordered(2, 0, 1).size() == 0);
    CHECK(ordered(2, 1, 0).size() == 0);

    // The swapped ordering's lone branch is the root that ignores the last
    // collision; the loss-sign run on the identity ordering reaches the same
    // state, which is what the cancellation audit pairs up.
    auto swapped = ordered(0, 2, 1);
    TrajectoryLog log = evolve(sc.initial, sc.horizon, sc.tolerances);
    Configuration at_c2 = log.state_at(log.events[1].time);
    ParticleState zt = at_c2[0];
    zt.x += zt.v * (sc.horizon - log.events[1].time);
    CHECK(particle_diff(swapped[0].endpoint[0], zt) <= 1e-12);
    CHECK(swapped[0].choice_path == "C+,C+");
    CHECK(swapped[0].creation_times[0] == Approx(log.events[1].time).margin(1e-9));
    CHECK(swapped[0].creation_times[1] == Approx(log.events[0].time).margin(1e-9));

    auto loss = iff_branches(tree, {-1, +1}, sc.initial, sc.horizon, sc.tolerances);
    REQUIRE(loss.size() == 2);
    CHECK(loss[1].choice_path == "R,C+,C-");
    CHECK(particle_diff(loss[1].endpoint[0], zt) <= 1e-12);
}

TEST_CASE("backward and forward flows agree on creation data") {
    Scenario sc = load_scenario(kGoldenPath);
    TrajectoryLog log = evolve(sc.initial, sc.horizon, sc.tolerances);
    const Tree tree{1, {1, 2}};
    NodeVariables nodes;
    nodes.times = {log.events[3].time, log.events[2].time};
    nodes.omegas = {creation_omega(log.events[3], 1), creation_omega(log.events[2], 2)};
    nodes.velocities = {creation_velocity(log.events[3], 1), creation_velocity(log.events[2], 2)};
    Configuration roots;
    roots.epsilon = sc.initial.epsilon;
    roots.particles = {log.final_state[0]};
    auto r = ibf(tree, {+1, +1}, roots, nodes, sc.horizon, sc.tolerances);
    REQUIRE(r.constraint_satisfied);
    REQUIRE(r.sign_consistent);

    // The terminal state, run forward, must offer a branch matching the roots
    // and the node times.
    auto branches = iff_branches(tree, {+1, +1}, r.terminal, sc.horizon, sc.tolerances);
    bool matched = false;
    for (const auto& br : branches) {
        if (std::fabs(br.creation_times[0] - nodes.times[0]) > 1e-9) continue;
        if (std::fabs(br.creation_times[1] - nodes.times[1]) > 1e-9) continue;
        if (particle_diff(br.endpoint[0], roots[0]) > 1e-8) continue;
        matched = true;
    }
    CHECK(matched);
}

TEST_CASE("reconstruction Jacobian matches the kernel product") {
    Scenario sc = load_scenario(kGoldenPath);
    TrajectoryLog log = evolve(sc.initial, sc.horizon, sc.tolerances);
    const Tree tree{1, {1, 2}};

    // With recollisions.
    NodeVariables nodes;
    nodes.times = {log.events[3].time, log.events[2].time};
    nodes.omegas = {creation_omega(log.events[3], 1), creation_omega(log.events[2], 2)};
    nodes.velocities = {creation_velocity(log.events[3], 1), creation_velocity(log.events[2], 2)};
    Configuration roots;
    roots.epsilon = sc.initial.epsilon;
    roots.particles = {log.final_state[0]};
    CHECK(ibf_jacobian_residual(tree, {+1, +1}, roots, nodes, sc.horizon, sc.tolerances.fd_step,
                                sc.tolerances) <= sc.tolerances.jacobian_n2);
    // A coarse step walks the flow across an event boundary.
    CHECK_THROWS_AS(ibf_jacobian_residual(tree, {+1, +1}, roots, nodes, sc.horizon, 0.3,
                                          sc.tolerances),
                    degenerate_sample_error);
    // Declaring the gain nodes as losses is rejected up front.
    CHECK_THROWS_AS(ibf_jacobian_residual(tree, {-1, -1}, roots, nodes, sc.horizon,
                                          sc.tolerances.fd_step, sc.tolerances),
                    invalid_input_error);

    // Zero creations: free transport has unit Jacobian.
    const Tree empty{1, {}};
    NodeVariables none;
    CHECK(ibf_jacobian_residual(empty, {}, roots, none, sc.horizon, sc.tolerances.fd_step,
                                sc.tolerances) <= 1e-6);

    // A grazing creation is not a valid base point.
    Scenario two = build_two_sphere(3.0, 2.0, 0.0, 1.0);
    TrajectoryLog tlog = evolve(two.initial, two.horizon, two.tolerances);
    const Tree one{1, {1}};
    NodeVariables gnodes;
    gnodes.times = {tlog.events[0].time};
    gnodes.omegas = {creation_omega(tlog.events[0], 1)};
    Vec3 tangential = tlog.final_state[0].v + Vec3{0.0, 0.7, 0.0};
    gnodes.velocities = {tangential};
    Configuration groots;
    groots.epsilon = 1.0;
    groots.particles = {tlog.final_state[0]};
    CHECK_THROWS_AS(ibf_jacobian_residual(one, {+1}, groots, gnodes, two.horizon,
                                          two.tolerances.fd_step, two.tolerances),
                    invalid_input_error);
}

TEST_CASE("random creation data stays within the Jacobian tolerances") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-4.0, 4.0), uv(-1.0, 1.0);
    auto rand_unit = [&]() {
        Vec3 w;
        do {
            w = {uv(rng), uv(rng), uv(rng)};
        } while (norm(w) < 0.1);
        return normalized(w);
    };
    const Tolerances tol;
    int checked1 = 0, checked2 = 0;
    for (int i = 0; i < 24 && (checked1 < 8 || checked2 < 8); ++i) {
        const int n = 1 + (i % 2);
        Tree tree{1, {}};
        tree.k = (n == 1) ? std::vector<int>{1} : std::vector<int>{1, (i % 4 < 2) ? 1 : 2};
        Configuration roots;
        roots.epsilon = 1.0;
        roots.particles = {{{ux(rng), ux(rng), ux(rng)}, {uv(rng), uv(rng), uv(rng)}}};
        NodeVariables nodes;
        const double horizon = 2.0;
        const double t1 = 0.4 + 1.2 * (uv(rng) * 0.5 + 0.5);
        const double t2 = 0.1 + (t1 - 0.2) * (uv(rng) * 0.5 + 0.5);
        nodes.times = (n == 1) ? std::vector<double>{t1} : std::vector<double>{t1, t2};
        for (int r = 0; r < n; ++r) {
            nodes.omegas.push_back(rand_unit());
            nodes.velocities.push_back({uv(rng), uv(rng), uv(rng)});
        }
        SignVector signs(n, +1);
        auto base = ibf(tree, signs, roots, nodes, horizon, tol);
        if (!base.constraint_satisfied) continue;
        bool grazing = false;
        for (double b : base.kernel_factors)
            if (std::fabs(b) <= 1e-3) grazing = true;
        if (grazing) continue;
        for (int r = 0; r < n; ++r) signs[r] = base.kernel_factors[r] >= 0.0 ? +1 : -1;
        const double res =
            ibf_jacobian_residual(tree, signs, roots, nodes, horizon, tol.fd_step, tol);
        if (n == 1) {
            CHECK(res <= tol.jacobian_n1);
            ++checked1;
        } else {
            CHECK(res <= tol.jacobian_n2);
            ++checked2;
        }
    }
    CHECK(checked1 >= 8);
    CHECK(checked2 >= 8);
}

TEST_CASE("free reconstruction inverts on random creation data") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), uv(-1.0, 1.0);
    auto rand_unit = [&]() {
        Vec3 w;
        do {
            w = {uv(rng), uv(rng), uv(rng)};
        } while (norm(w) < 0.1);
        return normalized(w);
    };
    const Tolerances tol;
    int done = 0;
    while (done < 50) {
        const int n = 1 + (done % 2);
        Tree tree{1, {}};
        tree.k = (n == 1) ? std::vector<int>{1} : std::vector<int>{1, (done % 4 < 2) ? 1 : 2};
        Configuration roots;
        roots.epsilon = 1.0;
        roots.particles = {{{ux(rng), ux(rng), ux(rng)}, {uv(rng), uv(rng), uv(rng)}}};
        NodeVariables nodes;
        const double horizon = 2.0;
        const double t1 = 0.3 + 1.4 * (uv(rng) * 0.5 + 0.5);
        const double t2 = 0.1 + (t1 - 0.2) * (uv(rng) * 0.5 + 0.5);
        nodes.times = (n == 1) ? std::vector<double>{t1} : std::vector<double>{t1, t2};
        for (int r = 0; r < n; ++r) {
            nodes.omegas.push_back(rand_unit());
            nodes.velocities.push_back({uv(rng), uv(rng), uv(rng)});
        }
        SignVector signs(n, +1);
        auto forward = ebf(tree, signs, roots, nodes, horizon, tol);
        bool grazing = false;
        for (double b : forward.kernel_factors)
            if (std::fabs(b) < 1e-3) grazing = true;
        if (grazing) continue;
        for (int r = 0; r < n; ++r) signs[r] = forward.kernel_factors[r] >= 0.0 ? +1 : -1;
        auto pre = ebf_invert(tree, signs, forward.terminal, horizon, tol);
        CHECK(cfg_diff(pre.roots, roots) <= tol.ebf_round_trip);
        for (int r = 0; r < n; ++r) {
            CHECK(std::fabs(pre.nodes.times[r] - nodes.times[r]) <= tol.ebf_round_trip);
            for (int d = 0; d < 3; ++d) {
                CHECK(std::fabs(pre.nodes.omegas[r][d] - nodes.omegas[r][d]) <= tol.ebf_round_trip);
                CHECK(std::fabs(pre.nodes.velocities[r][d] - nodes.velocities[r][d]) <=
                      tol.ebf_round_trip);
            }
        }
        ++done;
    }
}

TEST_CASE("inversion rejects states outside the flow image") {
    const Tree tree{1, {1}};
    Configuration receding;
    receding.epsilon = 1.0;
    receding.particles = {{{0, 0, 0}, {-1, 0, 0}}, {{2, 0, 0}, {1, 0, 0}}};
    CHECK_THROWS_AS(ebf_invert(tree, {+1}, receding, 5.0, {}), no_preimage_error);

    Configuration overlapped;
    overlapped.epsilon = 1.0;
    overlapped.particles = {{{0, 0, 0}, {1, 0, 0}}, {{0.5, 0, 0}, {-1, 0, 0}}};
    CHECK_THROWS_AS(ebf_invert(tree, {+1}, overlapped, 5.0, {}), no_preimage_error);

    Configuration late;
    late.epsilon = 1.0;
    late.particles = {{{0, 0, 0}, {1, 0, 0}}, {{10, 0, 0}, {-1, 0, 0}}};
    CHECK_THROWS_AS(ebf_invert(tree, {+1}, late, 2.0, {}), no_preimage_error);
}

TEST_CASE("creation overlaps stop the backward construction as a zero term") {
    const Tree tree{1, {1, 2}};
    Configuration roots;
    roots.epsilon = 1.0;
    roots.particles = {{{0, 0, 0}, {0, 0, 0}}};
    NodeVariables nodes;
    nodes.times = {1.0, 0.5};
    nodes.omegas = {{1, 0, 0}, {-1, 0, 0}};
    // First creation recedes backward; the second lands half a diameter from
    // the stationary root.
    nodes.velocities = {{-1, 0, 0}, {-1, 0, 0}};
    auto r = ibf(tree, {-1, -1}, roots, nodes, 2.0, {});
    CHECK_FALSE(r.constraint_satisfied);
    CHECK(r.terminal.size() == 3);
    CHECK(r.kernel_factors.size() == 2);
    // Constructed segments stay queryable; earlier times are out of range.
    CHECK(r.state_at(0.75).size() == 2);
    CHECK_THROWS_AS(r.state_at(0.2), invalid_input_error);

    // The free flow carries no such constraint.
    auto free_flow = ebf(tree, {-1, -1}, roots, nodes, 2.0, {});
    CHECK(free_flow.constraint_satisfied);
    CHECK(free_flow.terminal.size() == 3);
}

TEST_CASE("flow input validation") {
    const Tree tree{1, {1, 2}};
    Configuration one;
    one.epsilon = 1.0;
    one.particles = {{{0, 0, 0}, {0, 0, 0}}};
    NodeVariables nodes;
    nodes.times = {1.0, 0.5};
    nodes.omegas = {{1, 0, 0}, {1, 0, 0}};
    nodes.velocities = {{0, 0, 0}, {0, 0, 0}};
    CHECK_THROWS_AS(ibf(tree, {+1}, one, nodes, 2.0, {}), invalid_input_error);
    CHECK_THROWS_AS(ibf(tree, {+1, +1}, one, nodes, 0.0, {}), invalid_input_error);
    NodeVariables bad = nodes;
    bad.times = {0.5, 1.0};  // not decreasing
    CHECK_THROWS_AS(ibf(tree, {+1, +1}, one, bad, 2.0, {}), invalid_input_error);

    Configuration two = one;
    two.particles.push_back({{3, 0, 0}, {0, 0, 0}});
    CHECK_THROWS_AS(iff_branches(tree, {+1, +1}, two, 2.0, {}), invalid_input_error);
    CHECK_THROWS_AS(ebf_invert(tree, {+1, +1}, two, 2.0, {}), invalid_input_error);
}
