#include <doctest.h>

#include "anroa/errors.hpp"
#include "anroa/optimizers.hpp"

#include <cmath>
#include <numbers>

using namespace anroa::opt;

namespace {

double sphere(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return s;
}

double norm(const std::vector<double>& x) {
    return std::sqrt(sphere(x));
}

double rastrigin(std::span<const double> x) {
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) {
        s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    }
    return s;
}

Bounds cube(std::size_t n, double lo, double hi) {
    return Bounds{std::vector<std::pair<double, double>>(n, {lo, hi})};
}

bool non_increasing(const std::vector<double>& trace) {
    for (std::size_t k = 1; k < trace.size(); ++k) {
        if (trace[k] > trace[k - 1]) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("merge radius") {
    CHECK(merge_drops(1.0, 1.0, 1) == 2.0);
    CHECK(merge_drops(3.0, 4.0, 2) == 5.0);
    CHECK(merge_drops(0.7, 1e-300, 5) == 0.7);
    for (double r1 : {0.1, 1.0, 3.5}) {
        for (double r2 : {0.2, 2.0}) {
            for (std::size_t n : {1U, 2U, 5U}) {
                CHECK(merge_drops(r1, r2, n) == merge_drops(r2, r1, n));
                CHECK(merge_drops(r1, r2, n) >= std::max(r1, r2));
            }
        }
    }
    CHECK_THROWS_AS(merge_drops(0.0, 1.0, 1), anroa::ConfigError);
    CHECK_THROWS_AS(merge_drops(1.0, 1.0, 0), anroa::ConfigError);
}

TEST_CASE("soil absorption radius") {
    CHECK(shrink_radius(2.0, 0.5, 1) == 1.0);
    CHECK(shrink_radius(2.0, 0.5, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(shrink_radius(3.0, 1.0 - 1e-12, 4) == doctest::Approx(3.0).epsilon(1e-12));

    double r = 1.3;
    for (int k = 1; k <= 25; ++k) {
        const double next = shrink_radius(r, 0.8, 3);
        CHECK(next < r);
        r = next;
        CHECK(r == doctest::Approx(1.3 * std::pow(0.8, k / 3.0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(shrink_radius(1.0, 1.0, 1), anroa::ConfigError);
    CHECK_THROWS_AS(shrink_radius(1.0, 0.0, 1), anroa::ConfigError);
}

TEST_CASE("fitness transform branches") {
    CHECK(fitness_transform(-0.5) == 2.0);
    CHECK(fitness_transform(0.0) >= 1.0);
    CHECK(fitness_transform(1e-9) >= 1.0);
    CHECK(fitness_transform(3.0) == 4.0);
    CHECK(fitness_transform(3.0, 1.0) == 3.0);
    CHECK(fitness_transform(-0.8) > fitness_transform(-0.3));
}

TEST_CASE("ROA finds the 5-D sphere minimum") {
    const auto bounds = cube(5, -5.0, 5.0);
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        RoaParams p;
        p.seed = seed;
        const auto r = roa_minimize(sphere, bounds, p);
        CHECK(non_increasing(r.trace));
        CHECK(r.cost == sphere(r.best));
        if (norm(r.best) < 1e-3) {
            ++hits;
        }
    }
    MESSAGE("sphere hits: " << hits << "/100");
    CHECK(hits >= 95);
}

TEST_CASE("ROA one-dimensional convex case") {
    RoaParams p;
    const auto r = roa_minimize([](std::span<const double> x) { return std::abs(x[0] - 2.0); },
                                Bounds{{{0.0, 10.0}}}, p);
    CHECK(std::abs(r.best[0] - 2.0) < 1e-3);
}

TEST_CASE("ROA on a constant objective") {
    const auto bounds = cube(3, -1.0, 2.0);
    RoaParams p;
    const auto r = roa_minimize([](std::span<const double>) { return 4.5; }, bounds, p);
    CHECK(r.cost == 4.5);
    for (double v : r.trace) {
        CHECK(v == 4.5);
    }
    for (std::size_t k = 0; k < r.best.size(); ++k) {
        CHECK(r.best[k] >= -1.0);
        CHECK(r.best[k] <= 2.0);
    }
}

TEST_CASE("ROA is deterministic and the population only shrinks") {
    const auto bounds = cube(4, -3.0, 3.0);
    RoaParams p;
    p.seed = 42;
    const auto a = roa_minimize(rastrigin, bounds, p);
    const auto b = roa_minimize(rastrigin, bounds, p);
    CHECK(a.best == b.best);
    CHECK(a.trace == b.trace);
    for (std::size_t count : a.drop_counts) {
        CHECK(count <= p.population);
    }
    for (std::size_t k = 1; k < a.drop_counts.size(); ++k) {
        CHECK(a.drop_counts[k] <= a.drop_counts[k - 1]);
    }
}

TEST_CASE("ROA rejects non-finite costs and honours seeds") {
    const auto bounds = cube(2, -1.0, 1.0);
    RoaParams p;
    p.max_iters = 20;
    const auto r = roa_minimize(
        [](std::span<const double> x) { return x[0] > 0.5 ? std::nan("") : sphere(x); }, bounds, p);
    CHECK(r.rejected > 0);
    CHECK(std::isfinite(r.cost));

    const auto seeded = roa_minimize(sphere, bounds, p, {{0.0, 0.0}});
    CHECK(seeded.cost == 0.0);
    CHECK(seeded.trace.front() == 0.0);

    CHECK_THROWS_AS(roa_minimize(sphere, bounds, p, {{0.0}}), anroa::ConfigError);
}

TEST_CASE("ROA with collapsed bounds returns the fixed point") {
    RoaParams p;
    p.max_iters = 5;
    const auto r = roa_minimize(sphere, Bounds{{{1.0, 1.0}, {-2.0, -2.0}}}, p);
    CHECK(r.best == std::vector<double>{1.0, -2.0});
    CHECK(r.cost == 5.0);
}

TEST_CASE("optimizer parameter validation") {
    RoaParams p;
    p.population = 1;
    CHECK_THROWS_AS(p.validate(), anroa::ConfigError);
    p = {};
    p.beta = 1.0;
    CHECK_THROWS_AS(p.validate(), anroa::ConfigError);
    p = {};
    p.max_iters = 0;
    CHECK_THROWS_AS(p.validate(), anroa::ConfigError);
    const Bounds inverted{{{1.0, 0.0}}};
    const Bounds fixed{{{1.0, 1.0}}};
    const Bounds empty;
    CHECK_THROWS_AS(inverted.validate(), anroa::ConfigError);
    CHECK_THROWS_AS(fixed.validate(), anroa::ConfigError);
    CHECK_NOTHROW(fixed.validate(true));
    CHECK_THROWS_AS(empty.validate(), anroa::ConfigError);
}

TEST_CASE("PSO on the 5-D sphere") {
    const auto bounds = cube(5, -5.0, 5.0);
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        PsoParams p;
        p.seed = seed;
        const auto r = pso_minimize(sphere, bounds, p);
        CHECK(non_increasing(r.trace));
        if (norm(r.best) < 1e-3) {
            ++hits;
        }
    }
    CHECK(hits >= 95);
}

TEST_CASE("PSO on 2-D Rastrigin") {
    const auto bounds = cube(2, -5.12, 5.12);
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        PsoParams p;
        p.seed = seed;
        if (pso_minimize(rastrigin, bounds, p).cost < 1.0) {
            ++hits;
        }
    }
    MESSAGE("rastrigin hits: " << hits << "/100");
    CHECK(hits >= 80);
}

TEST_CASE("single still particle stays put") {
    PsoParams p;
    p.population = 1;
    p.inertia = 0.0;
    p.cognitive = 0.0;
    p.social = 0.0;
    const auto r = pso_minimize(sphere, cube(3, -1.0, 1.0), p, {{0.25, -0.5, 0.75}});
    CHECK(r.best == std::vector<double>{0.25, -0.5, 0.75});

    const auto a = pso_minimize(rastrigin, cube(3, -2.0, 2.0), PsoParams{});
    const auto b = pso_minimize(rastrigin, cube(3, -2.0, 2.0), PsoParams{});
    CHECK(a.best == b.best);
}
