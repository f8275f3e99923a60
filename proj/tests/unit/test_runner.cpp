#include <doctest.h>

#include "anroa/errors.hpp"
#include "anroa/runner.hpp"

using namespace anroa;
using namespace anroa::run;

TEST_CASE("variant names") {
    for (const auto v : {Variant::proposed, Variant::po, Variant::pso_tuned}) {
        CHECK(parse_variant(variant_name(v)) == v);
    }
    CHECK_THROWS_WITH_AS(parse_variant("anfis"), doctest::Contains("variant"), ConfigError);
}

TEST_CASE("variants set the tracker and the optimizer") {
    auto cfg = sim::default_scenario();
    cfg.tuning.optimizer = sim::TuneOptimizer::roa;
    cfg.mppt.variant = sim::MpptVariant::po;

    const auto p = apply_variant(cfg, Variant::proposed);
    CHECK(p.mppt.variant == sim::MpptVariant::anfis);
    CHECK(p.tuning.optimizer == sim::TuneOptimizer::roa);

    const auto b = apply_variant(cfg, Variant::po);
    CHECK(b.mppt.variant == sim::MpptVariant::po);
    CHECK(b.tuning.optimizer == sim::TuneOptimizer::none);

    const auto s = apply_variant(cfg, Variant::pso_tuned);
    CHECK(s.mppt.variant == sim::MpptVariant::anfis);
    CHECK(s.tuning.optimizer == sim::TuneOptimizer::pso);

    cfg.tuning.optimizer = sim::TuneOptimizer::none;
    CHECK(apply_variant(cfg, Variant::proposed).tuning.optimizer == sim::TuneOptimizer::none);
}

TEST_CASE("untuned baseline run") {
    auto cfg = sim::default_scenario();
    cfg.duration = 0.2;
    const auto out = run_variant(cfg, Variant::po);
    REQUIRE(out.summary);
    CHECK_FALSE(out.tuning);
    CHECK(out.summary->label == "po");
    CHECK(out.config.vsc.kp == cfg.vsc.kp);
    CHECK(out.summary->load_thd_percent > 10.0);
    CHECK(out.wall_seconds > 0.0);
}

TEST_CASE("a faulted run has no summary") {
    auto cfg = sim::default_scenario();
    cfg.duration = 0.2;
    cfg.plant.v_dc0 = 60.0;
    const auto out = run_variant(cfg, Variant::po);
    CHECK(out.trace.faulted);
    CHECK_FALSE(out.summary);
}
