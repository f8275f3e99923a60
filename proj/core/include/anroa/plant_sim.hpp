#pragma once

#include "anroa/anfis.hpp"
#include "anroa/mppt.hpp"
#include "anroa/pv_array.hpp"
#include "anroa/vsc_control.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace anroa::sim {

using vsc::Abc;
using vsc::Legs;

struct GridParams {
    double v_ll_rms = 415.0;
    double freq = 50.0;
    double source_inductance = 50e-6; // 0 selects a stiff source
    double source_resistance = 0.0;

    double phase_peak() const;
    void validate() const;
};

struct PlantParams {
    double dc_capacitance = 0.05;
    double v_dc0 = 700.0;
    double boost_inductance = 2e-3;
    double filter_inductance = 2.5e-3;
    double filter_resistance = 0.05;
    double ripple_resistance = 5.0;
    double ripple_capacitance = 10e-6;
    double current_rating = 63.9; // VSC current amplitude rating, amps

    void validate() const;
};

struct PhaseDisconnect {
    int phase = 0; // 0, 1, 2 for a, b, c
    double t_on = 0.3;
    double t_off = 0.4;
};

struct LoadConfig {
    double bridge_r = 35.0;
    double bridge_l = 0.1;
    std::optional<PhaseDisconnect> phase_disconnect;

    void validate() const;
};

enum class MpptVariant { anfis, po, dcref };

struct MpptSettings {
    MpptVariant variant = MpptVariant::anfis;
    double period = 5e-3;
    double initial_duty = 0.2;
    double delta_d = 0.005;      // P&O step
    double epsilon = 1e-3;       // incremental-conductance hold tolerance, siemens
    double vref_step = 1.0;      // reference perturbation, volts
    double gamma = 1.1928;       // reference floor factor
    double dc_max = 800.0;
    double dcref_duty = 0.35;    // fixed duty of the reference-perturbation variant
    mppt::TeacherConfig teacher;
    int anfis_mfs = 4;
    int anfis_epochs = 50;
    double anfis_learning_rate = 0.01;
    std::string anfis_file;      // trained parameters; empty trains from the teacher

    void validate() const;
};

enum class TuneOptimizer { none, roa, pso };

struct TuningSettings {
    TuneOptimizer optimizer = TuneOptimizer::none;
    double episode = 0.1;
    double dc_weight = 0.1;
    std::array<std::pair<double, double>, 3> bounds{{{1.0, 10.0}, {0.1, 5.0}, {0.1, 1.0}}}; // kp, ki, band
    std::size_t population = 6;
    std::size_t iterations = 6;

    void validate() const;
};

struct IrradianceEvent {
    double time = 0.0;
    std::vector<double> irradiance; // one value per section
};

struct ScenarioConfig {
    std::string name = "scenario";
    double duration = 0.6;
    double step = 10e-6;
    std::uint64_t seed = 1;
    pv::PvArrayConfig array;
    GridParams grid;
    PlantParams plant;
    LoadConfig load;
    MpptSettings mppt;
    vsc::VscConfig vsc;
    TuningSettings tuning;
    std::vector<IrradianceEvent> schedule;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Defaults with a fitted array module; the starting point of every scenario.
ScenarioConfig default_scenario();

struct PlantState {
    double time = 0.0;
    double v_dc = 700.0;
    double boost_current = 0.0;
    double v_pv = 0.0;
    Abc vsc_currents{};
    Abc grid_currents{};
    Abc ripple_voltages{};
    double load_bridge_current = 0.0;
};

/// Averaged boost, explicit: L di/dt = v_pv - (1 - duty) v_dc, current floored at 0.
double step_boost(double i_l, double duty, double v_pv, double v_dc, double inductance, double dt);

/// Averaged boost against the array curve, backward Euler. Returns (i_l, v_pv).
std::pair<double, double> step_boost_implicit(double i_l, double duty, double v_dc, const pv::IvTable& curve,
                                              double inductance, double dt);

/// C dv/dt = (p_in - p_out) / v_dc, explicit. Throws SimulationFault below 50 V.
double step_dclink(double v_dc, double p_in, double p_out, double capacitance, double dt, double time = 0.0);

/// Pole voltages +-v_dc/2 per leg with the common mode removed.
Abc pole_voltages(const Legs& legs, double v_dc);

/// Explicit update of L di/dt = v_pole - v_pcc - R i per phase.
Abc step_vsc_currents(const Abc& i, const Legs& legs, double v_dc, const Abc& v_pcc, double inductance,
                      double resistance, double dt);

/// Six-pulse ideal-diode bridge with RL on the DC side. Returns the AC line
/// currents and updates the DC current in place. Phase `open` (if >= 0) is
/// disconnected. `v` is the open-circuit supply voltage behind `r_source` per
/// phase; with r_source > 0 phases whose voltages meet share the rail current
/// (commutation overlap), otherwise the largest line voltage conducts alone.
Abc bridge_load(const Abc& v, double& i_dc, const LoadConfig& cfg, double dt, int open = -1,
                double r_source = 0.0);

struct SimTrace {
    double step = 0.0;
    std::vector<double> time;
    std::array<std::vector<double>, 3> v_g, i_g, i_load, i_vsc, i_gref;
    std::vector<double> v_dc, v_dcref, p_pv, i_pv, v_pv, p_g, q_g, p_load, p_loss, duty, irradiance;

    bool faulted = false;
    double fault_time = 0.0;
    std::string fault_message;

    std::size_t size() const noexcept { return time.size(); }
    void reserve(std::size_t n);
    /// Fixed column order used by the CSV writer.
    std::vector<std::string> column_names() const;
    std::vector<const std::vector<double>*> columns() const;
    std::vector<std::vector<double>*> columns();
};

/// Per-segment maximum power of the irradiance schedule.
struct MppSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    pv::OperatingPoint mpp;
};

std::vector<MppSegment> mpp_schedule(const ScenarioConfig& cfg);

/// Array configuration in force at time t.
pv::PvArrayConfig array_at(const ScenarioConfig& cfg, double t);

/// Trains the MPPT network for cfg (or loads mppt.anfis_file).
anfis::AnfisNet prepare_anfis(const ScenarioConfig& cfg);

/// Fixed-step closed-loop run. Faults stop the run and are reported in the
/// returned (partial) trace. `net` skips network preparation when given.
SimTrace run_scenario(const ScenarioConfig& cfg, const anfis::AnfisNet* net = nullptr);

} // namespace anroa::sim
