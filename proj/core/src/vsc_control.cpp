#include "anroa/vsc_control.hpp"

#include "anroa/errors.hpp"

#include <algorithm>
#include <cmath>

namespace anroa::vsc {

Abc phase_from_line(double v_sab, double v_sbc) {
    const double a = (2.0 * v_sab + v_sbc) / 3.0;
    const double b = (v_sbc - v_sab) / 3.0;
    // c closes the set so the three always sum to zero.
    return {a, b, -a - b};
}

double pcc_amplitude(const Abc& v) {
    return std::sqrt(2.0 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 3.0);
}

Abc unit_templates(const Abc& v, double v_t) {
    if (!(v_t >= kDeadVoltage)) {
        throw DegenerateInputError("unit_templates: PCC amplitude below the dead-voltage floor");
    }
    return {v[0] / v_t, v[1] / v_t, v[2] / v_t};
}

void PiState::validate() const {
    if (!(kp >= 0.0 && ki >= 0.0)) {
        throw ConfigError("vsc.kp, vsc.ki: must be >= 0");
    }
    if (!(limit > 0.0)) {
        throw ConfigError("vsc: anti-windup limit must be > 0");
    }
}

double loss_component(PiState& s, double v_dcref, double v_dc) {
    const double err = v_dcref - v_dc;
    s.i_loss = std::clamp(s.i_loss + s.kp * (err - s.prev_err) + s.ki * err, -s.limit, s.limit);
    s.prev_err = err;
    return s.i_loss;
}

double feedforward(double p_pv, double v_t) {
    if (!(v_t >= kDeadVoltage)) {
        throw DegenerateInputError("feedforward: PCC amplitude below the dead-voltage floor");
    }
    return 2.0 * p_pv / (3.0 * v_t);
}

double feedforward_line(double p_pv, double v_pa) {
    if (!(v_pa >= kDeadVoltage)) {
        throw DegenerateInputError("feedforward_line: voltage base below the dead-voltage floor");
    }
    return 2.0 * p_pv / v_pa;
}

Abc reference_currents(double i_loss, double i_pvf, const Abc& templates) {
    const double i_gp = i_loss - i_pvf;
    return {i_gp * templates[0], i_gp * templates[1], i_gp * templates[2]};
}

void HysteresisState::validate() const {
    if (!(band > 0.0)) {
        throw ConfigError("vsc.band: must be > 0");
    }
}

Legs hysteresis_gate(const Abc& i, const Abc& i_ref, HysteresisState& state) {
    for (std::size_t k = 0; k < 3; ++k) {
        const double err = i_ref[k] - i[k];
        if (err > state.band) {
            state.legs[k] = true;
        } else if (err < -state.band) {
            state.legs[k] = false;
        }
    }
    return state.legs;
}

void VscConfig::validate() const {
    PiState{kp, ki, 0.0, 0.0, 1.0}.validate();
    HysteresisState{band, {}}.validate();
    if (!(v_dcref > 0.0)) {
        throw ConfigError("vsc.v_dcref: must be > 0");
    }
    if (!(sample_period > 0.0 && pi_period >= sample_period)) {
        throw ConfigError("vsc.pi_period: must be >= sample_period > 0");
    }
    if (!(rated_power > 0.0 && windup_factor > 0.0 && v_ll_rms > 0.0)) {
        throw ConfigError("vsc: rated_power, windup_factor and v_ll_rms must be > 0");
    }
}

VscController::VscController(const VscConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    pi_.kp = cfg_.kp;
    pi_.ki = cfg_.ki;
    const double v_t = std::sqrt(2.0 / 3.0) * cfg_.v_ll_rms;
    pi_.limit = cfg_.windup_factor * 2.0 * cfg_.rated_power / (3.0 * v_t);
    hyst_.band = cfg_.band;
    pi_samples_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg_.pi_period / cfg_.sample_period)));
}

VscOutput VscController::step(const Abc& v_pcc, const Abc& i_g, double v_dc, double p_pv) {
    VscOutput out;
    v_dc_sum_ += v_dc;
    if (++count_ == pi_samples_) {
        loss_component(pi_, cfg_.v_dcref, v_dc_sum_ / static_cast<double>(count_));
        count_ = 0;
        v_dc_sum_ = 0.0;
    }
    out.i_loss = pi_.i_loss;

    const Abc v = phase_from_line(v_pcc[0] - v_pcc[1], v_pcc[1] - v_pcc[2]);
    out.v_t = pcc_amplitude(v);
    if (out.v_t < kDeadVoltage) {
        out.grid_lost = true;
        out.legs = hyst_.legs;
        return out;
    }
    out.i_pvf = cfg_.formula == FeedforwardFormula::per_phase
                    ? feedforward(p_pv, out.v_t)
                    : feedforward_line(p_pv, cfg_.v_ll_rms);
    out.i_gref = reference_currents(out.i_loss, out.i_pvf, unit_templates(v, out.v_t));

    // The gate is applied in the VSC output direction: a grid current above its
    // reference calls for more converter current, hence the upper switch.
    const Abc export_i{-i_g[0], -i_g[1], -i_g[2]};
    const Abc export_ref{-out.i_gref[0], -out.i_gref[1], -out.i_gref[2]};
    out.legs = hysteresis_gate(export_i, export_ref, hyst_);
    return out;
}

} // namespace anroa::vsc
