#include <doctest.h>

#include "anroa/errors.hpp"
#include "anroa/tuning.hpp"

#include <cmath>

using namespace anroa;
using namespace anroa::tune;

namespace {

sim::ScenarioConfig episode_config() {
    auto cfg = sim::default_scenario();
    cfg.mppt.variant = sim::MpptVariant::po;
    cfg.tuning.episode = 0.1;
    cfg.tuning.population = 4;
    cfg.tuning.iterations = 3;
    return cfg;
}

} // namespace

TEST_CASE("episode cost by hand") {
    sim::SimTrace tr;
    tr.step = 0.5;
    for (int n = 0; n < 3; ++n) {
        tr.time.push_back(0.5 * n);
        for (std::size_t k = 0; k < 3; ++k) {
            tr.i_g[k].push_back(1.0);
            tr.i_gref[k].push_back(k == 0 ? 3.0 : 1.0);
        }
        tr.v_dc.push_back(690.0);
        tr.v_dcref.push_back(700.0);
    }
    // Two intervals: 0.5 * (2 + 0.1 * 10) each.
    CHECK(episode_cost(tr, 0.1) == doctest::Approx(3.0));
    CHECK(episode_cost(tr, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("collapsed bounds return the defaults") {
    auto cfg = episode_config();
    cfg.tuning.bounds = {{{4.8, 4.8}, {1.0, 1.0}, {0.25, 0.25}}};
    const auto r = roa_tune(cfg, nullptr, 1);
    CHECK(r.gains.kp == 4.8);
    CHECK(r.gains.ki == 1.0);
    CHECK(r.gains.band == 0.25);
    CHECK(r.cost == r.default_cost);
    CHECK(evaluate_gains(cfg, nullptr, r.defaults) == r.default_cost);
}

TEST_CASE("tuned gains never cost more than the defaults") {
    const auto cfg = episode_config();
    for (std::uint64_t seed : {1u, 2u}) {
        const auto roa = roa_tune(cfg, nullptr, seed);
        CHECK(roa.cost <= roa.default_cost);
        CHECK(evaluate_gains(cfg, nullptr, roa.gains) == roa.cost);
        CHECK(roa.gains.kp >= 1.0);
        CHECK(roa.gains.kp <= 10.0);
        CHECK(roa.gains.band >= 0.1);
        const auto pso = pso_tune(cfg, nullptr, seed);
        CHECK(pso.cost <= pso.default_cost);
    }
}

TEST_CASE("tuning is deterministic per seed") {
    const auto cfg = episode_config();
    const auto a = roa_tune(cfg, nullptr, 7);
    const auto b = roa_tune(cfg, nullptr, 7);
    CHECK(a.gains.kp == b.gains.kp);
    CHECK(a.gains.ki == b.gains.ki);
    CHECK(a.gains.band == b.gains.band);
    CHECK(a.search.trace == b.search.trace);
}

TEST_CASE("a faulting candidate costs infinity") {
    auto cfg = episode_config();
    cfg.plant.v_dc0 = 60.0;
    CHECK(std::isinf(evaluate_gains(cfg, nullptr, {4.8, 1.0, 0.25})));
}

TEST_CASE("no optimizer keeps the configured gains") {
    const auto cfg = episode_config();
    const auto r = tune_gains(cfg, nullptr, sim::TuneOptimizer::none, 1);
    CHECK(r.gains.kp == cfg.vsc.kp);
    CHECK(r.search.evaluations == 0);
    CHECK(std::isfinite(r.default_cost));
}

TEST_CASE("tuning settings validation") {
    auto cfg = episode_config();
    cfg.tuning.episode = 0.5;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("tuning.episode"), ConfigError);
    cfg = episode_config();
    cfg.tuning.bounds[0] = {5.0, 1.0};
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("tuning.bounds[0]"), ConfigError);
}
