#include <doctest.h>

#include "anroa/errors.hpp"
#include "anroa/pv_array.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace anroa::pv;

namespace {

PvModuleParams stc_module() { return fit_module(PvModuleParams{}); }

PvArrayConfig default_array() {
    PvArrayConfig cfg;
    cfg.module = stc_module();
    return cfg;
}

PvArrayConfig two_sections(double g1, double g2) {
    PvArrayConfig cfg = default_array();
    cfg.sections = {{9, g1}, {9, g2}};
    return cfg;
}

// Plain bisection on the single-diode equation at reference conditions.
double bisection_current(const PvModuleParams& m, double v) {
    const double vt = m.ideality * m.cells_in_series * 8.617333262e-5 * (25.0 + 273.15);
    auto f = [&](double i) {
        return m.i_photo - m.i_sat * (std::exp((v + i * m.r_series) / vt) - 1.0) - (v + i * m.r_series) / m.r_shunt - i;
    };
    double lo = 0.0;
    double hi = m.i_photo;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

int count_local_maxima(const PvArrayConfig& cfg, double step) {
    const double v_oc = array_open_circuit_voltage(cfg);
    std::vector<double> p;
    for (double v = 0.0; v < v_oc; v += step) {
        p.push_back(v * array_current(cfg, v));
    }
    // A peak must rise by more than the root-finding noise on both sides.
    int peaks = 0;
    int trend = 1;
    double anchor = p.front();
    for (double x : p) {
        if (trend > 0 && x < anchor - 1e-3) {
            ++peaks;
            trend = -1;
            anchor = x;
        } else if (trend < 0 && x > anchor + 1e-3) {
            trend = 1;
            anchor = x;
        } else if ((trend > 0 && x > anchor) || (trend < 0 && x < anchor)) {
            anchor = x;
        }
    }
    return peaks;
}

} // namespace

TEST_CASE("fit reproduces the datasheet points at STC") {
    const auto m = stc_module();
    CHECK(m.r_series >= 0.0);
    CHECK(m.r_shunt > 0.0);
    CHECK(module_current(m, m.v_mp, 1000.0) == doctest::Approx(7.61).epsilon(0.005));
    CHECK(module_current(m, 0.0, 1000.0) == doctest::Approx(m.i_sc).epsilon(1e-6));
    CHECK(module_current(m, m.v_oc, 1000.0) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("module current without photocurrent is zero") {
    const auto m = stc_module();
    for (double v = 0.0; v <= m.v_oc; v += 0.5) {
        CHECK(module_current(m, v, 0.0) == 0.0);
    }
}

TEST_CASE("module current agrees with a bisection oracle") {
    const auto m = stc_module();
    CHECK(module_current(m, 13.15, 1000.0) == doctest::Approx(bisection_current(m, 13.15)).epsilon(1e-9));
    CHECK(module_current(m, 30.0, 1000.0) == doctest::Approx(bisection_current(m, 30.0)).epsilon(1e-9));
}

TEST_CASE("module current is monotone in voltage and linear in irradiance near short circuit") {
    const auto m = stc_module();
    double prev = module_current(m, 0.0, 800.0);
    for (double v = 0.1; v <= m.v_oc + 1.0; v += 0.1) {
        const double i = module_current(m, v, 800.0);
        CHECK(i <= prev + 1e-12);
        prev = i;
    }
    CHECK(module_current(m, 0.0, 500.0) == doctest::Approx(0.5 * module_current(m, 0.0, 1000.0)).epsilon(0.01));
}

TEST_CASE("module_current rejects negative inputs") {
    const auto m = stc_module();
    CHECK_THROWS_AS(module_current(m, -1.0, 1000.0), anroa::ConfigError);
    CHECK_THROWS_AS(module_current(m, 1.0, -1.0), anroa::ConfigError);
}

TEST_CASE("array scales the module by series and parallel counts") {
    const auto cfg = default_array();
    CHECK(array_current(cfg, 18.0 * 26.3) == doctest::Approx(9.0 * 7.61).epsilon(0.005));
    CHECK(array_current(cfg, array_open_circuit_voltage(cfg)) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(array_open_circuit_voltage(cfg) == doctest::Approx(18.0 * 32.9).epsilon(1e-6));
}

TEST_CASE("array current is non-increasing under uniform irradiance") {
    const auto cfg = default_array();
    double prev = array_current(cfg, 0.0);
    for (double v = 1.0; v < 600.0; v += 1.0) {
        const double i = array_current(cfg, v);
        CHECK(i <= prev + 1e-12);
        CHECK(i >= 0.0);
        prev = i;
    }
}

TEST_CASE("two shaded sections produce exactly two P-V peaks") {
    CHECK(count_local_maxima(two_sections(1000.0, 500.0), 0.001) == 2);
    CHECK(count_local_maxima(default_array(), 0.01) == 1);
}

TEST_CASE("shaded sections bypass at the diode drop") {
    const auto cfg = two_sections(1000.0, 200.0);
    // Above the shaded photocurrent the shaded section is bypassed and the
    // string voltage is the unshaded section voltage minus one diode drop.
    const double i_string = 6.0;
    const double v = 9.0 * module_voltage(cfg.module, i_string, 1000.0) - cfg.bypass_drop;
    CHECK(array_current(cfg, v) == doctest::Approx(9.0 * i_string).epsilon(1e-6));
}

TEST_CASE("inconsistent section partition is a configuration error") {
    auto cfg = default_array();
    cfg.sections = {{9, 1000.0}, {8, 1000.0}};
    CHECK_THROWS_AS(validate(cfg), anroa::ConfigError);
    CHECK_THROWS_AS(true_mpp(cfg), anroa::ConfigError);
    cfg.sections = {{9, 1000.0}, {9, 1600.0}};
    CHECK_THROWS_AS(validate(cfg), anroa::ConfigError);
}

TEST_CASE("true MPP of the default array") {
    const auto op = true_mpp(default_array());
    CHECK(op.p == doctest::Approx(32400.0).epsilon(0.01));
    CHECK(op.v == doctest::Approx(473.0).epsilon(0.01));
    CHECK(op.p == doctest::Approx(op.v * op.i).epsilon(1e-12));
}

TEST_CASE("true MPP with no irradiance is zero") {
    const auto cfg = two_sections(0.0, 0.0);
    CHECK(true_mpp(cfg).p == 0.0);
}

TEST_CASE("true MPP picks the larger of two shaded peaks") {
    const auto cfg = two_sections(1000.0, 400.0);
    double best = 0.0;
    for (double v = 0.0; v < array_open_circuit_voltage(cfg); v += 0.005) {
        best = std::max(best, v * array_current(cfg, v));
    }
    const auto op = true_mpp(cfg);
    CHECK(op.p >= best - 1e-6);
    CHECK(op.p <= best * (1.0 + 1e-6));
}

TEST_CASE("true MPP dominates randomly sampled operating points") {
    const auto cfg = two_sections(1000.0, 600.0);
    const auto op = true_mpp(cfg);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(0.0, array_open_circuit_voltage(cfg));
    for (int k = 0; k < 1000; ++k) {
        const double v = dist(rng);
        CHECK(op.p >= v * array_current(cfg, v));
    }
}

TEST_CASE("halving irradiance roughly halves the MPP power") {
    const auto full = true_mpp(two_sections(1000.0, 800.0));
    const auto half = true_mpp(two_sections(500.0, 400.0));
    CHECK(half.p / full.p > 0.40);
    CHECK(half.p / full.p < 0.60);
}

TEST_CASE("tabulated curve matches the direct solve") {
    const auto cfg = two_sections(1000.0, 600.0);
    const IvTable table(cfg);
    for (double v = 0.0; v < table.v_oc(); v += 7.3) {
        CHECK(table.current(v) == doctest::Approx(array_current(cfg, v)).epsilon(2e-3));
    }
    CHECK(table.current(table.v_oc() + 1.0) == 0.0);
}
