#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hsh/core.hpp"
#include "oracles.hpp"

using namespace hsh;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec3 v{g(rng), g(rng), g(rng)};
    return normalized(v);
}

Vec3 random_vec(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    return {g(rng), g(rng), g(rng)};
}

}  // namespace

TEST_CASE("scatter exchanges velocities in the head-on case") {
    // Frozen analytic case: equal speeds along the center line swap exactly.
    const Vec3 omega{-1.0, 0.0, 0.0};  // from particle k at x=+1 toward i at x=0... i left of k
    auto [vi, vk] = scatter({1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}, omega);
    CHECK(vi == Vec3{-1.0, 0.0, 0.0});
    CHECK(vk == Vec3{1.0, 0.0, 0.0});
}

TEST_CASE("scatter leaves the tangential part untouched") {
    const Vec3 omega{0.0, 0.0, 1.0};
    auto [vi, vk] = scatter({3.0, 2.0, -1.0}, {0.5, -2.0, 4.0}, omega);
    // Normal components exchange, tangential components persist.
    CHECK(vi.x == 3.0);
    CHECK(vi.y == 2.0);
    CHECK(vi.z == 4.0);
    CHECK(vk.x == 0.5);
    CHECK(vk.y == -2.0);
    CHECK(vk.z == -1.0);
}

TEST_CASE("scatter conserves momentum and energy, property over random pairs") {
    auto rng = std::mt19937_64(20240817);
    for (int trial = 0; trial < 500; ++trial) {
        const Vec3 vi0 = random_vec(rng, 3.0), vk0 = random_vec(rng, 3.0);
        const Vec3 omega = random_unit(rng);
        auto [vi, vk] = scatter(vi0, vk0, omega);
        const Vec3 dp = (vi + vk) - (vi0 + vk0);
        const double e0 = norm2(vi0) + norm2(vk0);
        const double e1 = norm2(vi) + norm2(vk);
        const double scale = 1.0 + e0;
        CHECK(norm(dp) <= 1e-12 * scale);
        CHECK(std::fabs(e1 - e0) <= 1e-12 * scale);
    }
}

TEST_CASE("scatter is an involution and even in omega") {
    auto rng = std::mt19937_64(77);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 vi0 = random_vec(rng, 2.0), vk0 = random_vec(rng, 2.0);
        const Vec3 omega = random_unit(rng);
        auto [vi1, vk1] = scatter(vi0, vk0, omega);
        auto [vi2, vk2] = scatter(vi1, vk1, omega);
        CHECK(norm(vi2 - vi0) <= 1e-12 * (1.0 + norm(vi0)));
        CHECK(norm(vk2 - vk0) <= 1e-12 * (1.0 + norm(vk0)));
        auto [vi3, vk3] = scatter(vi0, vk0, -omega);
        CHECK(norm(vi3 - vi1) == 0.0);
        CHECK(norm(vk3 - vk1) == 0.0);
    }
}

TEST_CASE("scatter rejects a non-unit normal") {
    CHECK_THROWS_AS(scatter({1, 0, 0}, {0, 0, 0}, Vec3{1.0, 1.0, 0.0}), invalid_input_error);
}

TEST_CASE("collision kernel sign convention") {
    // omega points from k toward i; an approaching pair has negative kernel.
    const Vec3 omega{1.0, 0.0, 0.0};
    CHECK(collision_kernel(omega, Vec3{-2.0, 5.0, 1.0}) == -2.0);
    CHECK(collision_kernel(omega, Vec3{0.5, -3.0, 0.0}) == 0.5);
}

TEST_CASE("contact time matches the frozen head-on value") {
    // Centers 3 apart, diameter 1, closing speed 2: contact at s = 1 exactly.
    ParticleState a{{0, 0, 0}, {1, 0, 0}};
    ParticleState b{{3, 0, 0}, {-1, 0, 0}};
    auto s = contact_time(a, b, 1.0);
    REQUIRE(s.has_value());
    CHECK(std::fabs(*s - 1.0) <= 1e-14);
}

TEST_CASE("contact time agrees with the bisection oracle on oblique approaches") {
    auto rng = std::mt19937_64(1234);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int contacts = 0;
    for (int trial = 0; trial < 300; ++trial) {
        ParticleState a{{0, 0, 0}, {1.0 + 0.3 * u(rng), 0.4 * u(rng), 0.4 * u(rng)}};
        ParticleState b{{4.0, 1.5 * u(rng), 1.5 * u(rng)}, {0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)}};
        const double eps = 1.0, horizon = 10.0;
        auto s = contact_time(a, b, eps);
        auto ref = oracle::first_contact(a, b, eps, horizon);
        if (ref) {
            ++contacts;
            REQUIRE(s.has_value());
            CHECK(std::fabs(*s - *ref) <= 1e-8);
        } else if (s) {
            CHECK(*s > horizon);  // contact exists but beyond the oracle window
        }
    }
    CHECK(contacts > 30);  // the family is chosen so a solid fraction collide
}

TEST_CASE("contact time misses when closest approach stays above the diameter") {
    ParticleState a{{0, 0, 0}, {1, 0, 0}};
    ParticleState b{{5, 2.0, 0}, {-1, 0, 0}};  // impact parameter 2 > diameter 1
    CHECK(!contact_time(a, b, 1.0).has_value());
    // Separating pair never contacts.
    ParticleState c{{0, 0, 0}, {-1, 0, 0}};
    ParticleState d{{3, 0, 0}, {1, 0, 0}};
    CHECK(!contact_time(c, d, 1.0).has_value());
}

TEST_CASE("contact time signals overlap") {
    ParticleState a{{0, 0, 0}, {1, 0, 0}};
    ParticleState b{{0.5, 0, 0}, {0, 0, 0}};
    CHECK_THROWS_AS(contact_time(a, b, 1.0), overlap_error);
}

TEST_CASE("touching approaching pair contacts immediately") {
    ParticleState a{{0, 0, 0}, {1, 0, 0}};
    ParticleState b{{1.0, 0, 0}, {0, 0, 0}};
    auto s = contact_time(a, b, 1.0);
    REQUIRE(s.has_value());
    CHECK(*s == 0.0);
}

TEST_CASE("min gap equals an independently computed pair minimum") {
    auto rng = std::mt19937_64(99);
    Configuration c;
    c.epsilon = 0.5;
    for (int i = 0; i < 6; ++i) c.particles.push_back({random_vec(rng, 5.0), {}});
    double ref = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c.size(); ++k)
        for (std::size_t i = 0; i < c.size(); ++i)
            if (i != k) ref = std::min(ref, norm(c[i].x - c[k].x));
    CHECK(min_gap(c) == ref);
}

TEST_CASE("grazing classification uses the relative-velocity scale") {
    Tolerances tol;
    CHECK(is_grazing(5e-11, Vec3{0.3, 0, 0}, tol));
    CHECK(!is_grazing(5e-9, Vec3{0.3, 0, 0}, tol));
    // A fast pair widens the absolute window.
    CHECK(is_grazing(5e-9, Vec3{100.0, 0, 0}, tol));
}

TEST_CASE("admissibility check flags overlapping configurations") {
    Configuration c;
    c.epsilon = 1.0;
    c.particles.push_back({{0, 0, 0}, {}});
    c.particles.push_back({{0.9, 0, 0}, {}});
    CHECK_THROWS_AS(check_admissible(c), overlap_error);
    c.particles[1].x.x = 1.0;  // exactly touching is admissible
    CHECK_NOTHROW(check_admissible(c));
}
