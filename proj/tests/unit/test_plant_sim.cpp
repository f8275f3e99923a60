#include <doctest.h>

#include "anroa/analysis.hpp"
#include "anroa/errors.hpp"
#include "anroa/plant_sim.hpp"

#include <cmath>
#include <numbers>
#include <tuple>

using namespace anroa;
using namespace anroa::sim;

namespace {

constexpr double kPi = std::numbers::pi;

Abc balanced(double t, double peak = 338.85) {
    const double w = 2.0 * kPi * 50.0 * t;
    return {peak * std::sin(w), peak * std::sin(w - 2.0 * kPi / 3.0), peak * std::sin(w + 2.0 * kPi / 3.0)};
}

ScenarioConfig quick(double duration = 0.1) {
    auto cfg = default_scenario();
    cfg.duration = duration;
    cfg.mppt.variant = MpptVariant::po;
    return cfg;
}

} // namespace

TEST_CASE("boost equilibrium") {
    CHECK(step_boost(10.0, 0.3, 490.0, 700.0, 2e-3, 10e-6) == doctest::Approx(10.0));
    CHECK(step_boost(5.0, 0.0, 700.0, 700.0, 2e-3, 10e-6) == 5.0);
    // 473.4 V against (1 - 0.324) * 700 = 473.2 V: almost no drift.
    CHECK(std::abs(step_boost(30.0, 0.324, 473.4, 700.0, 2e-3, 10e-6) - 30.0) < 2e-3);
    CHECK(step_boost(0.1, 0.0, 100.0, 700.0, 2e-3, 10e-6) == 0.0);
}

TEST_CASE("implicit boost settles on the array curve") {
    auto cfg = default_scenario();
    const pv::IvTable table(cfg.array);
    double i = 0.0;
    double v = 0.0;
    for (int k = 0; k < 5000; ++k) {
        std::tie(i, v) = step_boost_implicit(i, 0.324, 700.0, table, 2e-3, 10e-6);
    }
    CHECK(v == doctest::Approx(0.676 * 700.0).epsilon(1e-6));
    CHECK(i == doctest::Approx(table.current(v)).epsilon(1e-9));
    // Already at equilibrium: one step leaves it in place.
    const auto [i2, v2] = step_boost_implicit(i, 0.324, 700.0, table, 2e-3, 10e-6);
    CHECK(i2 == doctest::Approx(i).epsilon(1e-9));
    CHECK(v2 == doctest::Approx(v).epsilon(1e-9));
    // Output above open circuit: no current.
    CHECK(step_boost_implicit(0.0, 0.0, 900.0, table, 2e-3, 10e-6).first == 0.0);
}

TEST_CASE("dc link update") {
    CHECK(step_dclink(700.0, 5000.0, 5000.0, 3e-3, 10e-6) == 700.0);
    CHECK(step_dclink(700.0, 700.0, 0.0, 3e-3, 10e-6) - 700.0 == doctest::Approx(10.0 / 3000.0));
    CHECK_THROWS_AS(step_dclink(51.0, 0.0, 1e7, 3e-3, 10e-6), SimulationFault);
    CHECK_THROWS_AS(step_dclink(0.0, 0.0, 0.0, 3e-3, 10e-6), SimulationFault);

    const double c = 3e-3;
    const double dt = 10e-6;
    double v = 700.0;
    double energy = 0.0;
    for (int k = 0; k < 20000; ++k) {
        const double p = 3000.0 * std::sin(2.0 * kPi * 7.0 * k * dt) + 500.0;
        v = step_dclink(v, p, 0.0, c, dt);
        energy += p * dt;
    }
    const double stored = 0.5 * c * (v * v - 700.0 * 700.0);
    CHECK(std::abs(stored - energy) < 0.005 * std::abs(energy));
}

TEST_CASE("pole voltages carry no common mode") {
    const auto v = pole_voltages({true, false, false}, 700.0);
    CHECK(v[0] + v[1] + v[2] == doctest::Approx(0.0));
    CHECK(v[0] == doctest::Approx(700.0 * 2.0 / 3.0));
    for (const bool on : {true, false}) {
        const auto same = pole_voltages({on, on, on}, 700.0);
        CHECK(same[0] == 0.0);
        CHECK(same[1] == 0.0);
        CHECK(same[2] == 0.0);
    }
}

TEST_CASE("vsc current update") {
    const Legs legs{true, false, true};
    const auto vp = pole_voltages(legs, 700.0);
    const Abc i0{3.0, -1.0, -2.0};
    const auto i1 = step_vsc_currents(i0, legs, 700.0, vp, 2.5e-3, 0.0, 10e-6);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(i1[k] == i0[k]);
    }

    // Step-halving: the one-step/two-half-step gap shrinks by four when dt halves.
    const Abc v_pcc{100.0, -20.0, -80.0};
    auto gap = [&](double dt) {
        const auto full = step_vsc_currents(i0, legs, 700.0, v_pcc, 2.5e-3, 5.0, dt);
        const auto half = step_vsc_currents(step_vsc_currents(i0, legs, 700.0, v_pcc, 2.5e-3, 5.0, dt / 2.0), legs,
                                            700.0, v_pcc, 2.5e-3, 5.0, dt / 2.0);
        return std::abs(full[0] - half[0]);
    };
    CHECK(gap(10e-6) / gap(5e-6) == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("diode bridge") {
    LoadConfig cfg;
    double i_dc = 0.0;
    auto out = bridge_load(Abc{}, i_dc, cfg, 10e-6);
    CHECK(out == Abc{});
    CHECK(i_dc == 0.0);

    SUBCASE("large inductance gives the six-pulse spectrum") {
        cfg.bridge_l = 50.0;
        i_dc = 3.0 * std::sqrt(3.0) * 338.85 / kPi / cfg.bridge_r;
        std::vector<double> ia;
        for (int k = 0; k < 10000; ++k) {
            ia.push_back(bridge_load(balanced(k * 10e-6), i_dc, cfg, 10e-6)[0]);
        }
        CHECK(std::abs(analysis::thd(ia, 50.0, 1e5, 999).thd_percent - 31.1) < 0.5);
    }
    SUBCASE("open phase leaves a single pair") {
        i_dc = 5.0;
        for (int k = 0; k < 2000; ++k) {
            const auto i = bridge_load(balanced(k * 10e-6), i_dc, cfg, 10e-6, 0);
            CHECK(i[0] == 0.0);
            CHECK(i[1] == -i[2]);
        }
    }
    SUBCASE("phases with equal loaded voltage share the rail") {
        i_dc = 10.0;
        cfg.bridge_l = 0.1;
        const auto i = bridge_load({100.0, 100.0, -200.0}, i_dc, cfg, 10e-6, -1, 5.0);
        CHECK(i[0] == doctest::Approx(5.0));
        CHECK(i[1] == doctest::Approx(5.0));
        CHECK(i[2] == doctest::Approx(-10.0));
        double j = 10.0;
        const auto k = bridge_load({100.0, 90.0, -200.0}, j, cfg, 10e-6, -1, 5.0);
        CHECK(k[0] == doctest::Approx(6.0));
        CHECK(k[1] == doctest::Approx(4.0));
        CHECK(k[0] + k[1] + k[2] == doctest::Approx(0.0));
        double m = 10.0;
        const auto n = bridge_load({100.0, 20.0, -200.0}, m, cfg, 10e-6, -1, 5.0);
        CHECK(n[0] == doctest::Approx(10.0));
        CHECK(n[1] == 0.0);
    }
}

TEST_CASE("iv table inverse") {
    const pv::IvTable table(default_scenario().array);
    for (double v : {50.0, 300.0, 450.0, 500.0, 560.0}) {
        CHECK(table.voltage(table.current(v)) == doctest::Approx(v).epsilon(1e-6));
    }
    CHECK(table.voltage(0.0) == table.v_oc());
    CHECK(table.voltage(1e6) == 0.0);
}

TEST_CASE("scenario validation names the field") {
    auto cfg = quick();
    cfg.step = 1.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("step"), ConfigError);
    cfg = quick();
    cfg.duration = 0.05;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("duration"), ConfigError);
    cfg = quick();
    cfg.schedule = {{0.3, {1000.0, 600.0}}};
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("schedule[0].irradiance"), ConfigError);
    cfg = quick();
    cfg.load.bridge_r = 0.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("load.bridge_r"), ConfigError);
    cfg = quick();
    cfg.load.phase_disconnect = PhaseDisconnect{1, 0.4, 0.3};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(quick().validate());
}

TEST_CASE("irradiance schedule and oracle segments") {
    auto cfg = quick(0.6);
    cfg.array.sections = {{9, 1000.0}, {9, 1000.0}};
    cfg.schedule = {{0.3, {1000.0, 600.0}}};
    const auto segs = mpp_schedule(cfg);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].t_end == 0.3);
    CHECK(segs[1].mpp.p < segs[0].mpp.p);
    CHECK(pv::effective_sections(array_at(cfg, 0.31))[1].irradiance == 600.0);
    CHECK(pv::effective_sections(array_at(cfg, 0.29))[1].irradiance == 1000.0);
}

TEST_CASE("closed loop run") {
    const auto cfg = quick(0.2);
    const auto tr = run_scenario(cfg);
    REQUIRE_FALSE(tr.faulted);
    CHECK(tr.size() == 20001);
    for (const auto* c : tr.columns()) {
        CHECK(c->size() == tr.size());
        bool finite = true;
        for (double x : *c) {
            finite = finite && std::isfinite(x);
        }
        CHECK(finite);
    }
    CHECK(tr.column_names().size() == tr.columns().size());
    CHECK(std::abs(tr.v_dc.back() - 700.0) < 14.0);
    CHECK(analysis::power_balance_residual(tr, cfg.plant.dc_capacitance, 0.1, 0.2) < 0.02);
    CHECK(tr.p_g.back() > 0.0);
}

TEST_CASE("identical configs give identical traces") {
    const auto cfg = quick(0.1);
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    const auto ca = a.columns();
    const auto cb = b.columns();
    for (std::size_t k = 0; k < ca.size(); ++k) {
        CHECK(*ca[k] == *cb[k]);
    }
}

TEST_CASE("dark array and no load") {
    auto cfg = quick(0.2);
    cfg.array.sections = {{18, 0.0}};
    cfg.load.bridge_r = 1e9;
    cfg.load.bridge_l = 0.0;
    const auto tr = run_scenario(cfg);
    REQUIRE_FALSE(tr.faulted);
    CHECK(tr.p_pv.back() == 0.0);
    double worst = 0.0;
    for (std::size_t k = tr.size() / 2; k < tr.size(); ++k) {
        worst = std::max(worst, std::abs(tr.i_g[0][k]));
        CHECK(std::abs(tr.i_load[0][k]) < 1e-3);
    }
    CHECK(worst < 8.0);
    CHECK(std::abs(tr.v_dc.back() - 700.0) < 14.0);
}

TEST_CASE("an undersized dc link ends the run with a fault") {
    auto cfg = quick(0.2);
    cfg.plant.v_dc0 = 60.0;
    const auto tr = run_scenario(cfg);
    REQUIRE(tr.faulted);
    CHECK(tr.size() < 20001);
    CHECK(tr.fault_time > 0.0);
    CHECK_FALSE(tr.fault_message.empty());
}
