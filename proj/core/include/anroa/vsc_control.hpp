#pragma once

#include <array>
#include <cstddef>

namespace anroa::vsc {

using Abc = std::array<double, 3>;
using Legs = std::array<bool, 3>; // true: upper switch of that leg conducts

/// Below this PCC amplitude the grid is considered lost.
inline constexpr double kDeadVoltage = 1.0;

/// Phase voltages from the two sensed line voltages.
Abc phase_from_line(double v_sab, double v_sbc);

/// sqrt(2 (va^2 + vb^2 + vc^2) / 3); the phase peak for a balanced set.
double pcc_amplitude(const Abc& v);

/// Per-phase v / v_t. Throws DegenerateInputError when v_t is below kDeadVoltage.
Abc unit_templates(const Abc& v, double v_t);

struct PiState {
    double kp = 4.8;
    double ki = 1.0;
    double i_loss = 0.0;
    double prev_err = 0.0;
    double limit = 95.9; // anti-windup clamp on |i_loss|, amps

    void validate() const;
};

/// Incremental PI on e = v_dcref - v_dc, clamped to +-limit. Updates state.
double loss_component(PiState& state, double v_dcref, double v_dc);

/// 2 p_pv / (3 v_t). Throws DegenerateInputError when v_t is below kDeadVoltage.
double feedforward(double p_pv, double v_t);

/// Alternate form 2 p_pv / v_pa, kept for comparison runs.
double feedforward_line(double p_pv, double v_pa);

/// i_gp = i_loss - i_pvf scaled onto each template (grid-to-PCC direction).
Abc reference_currents(double i_loss, double i_pvf, const Abc& templates);

struct HysteresisState {
    double band = 0.25; // half-width, amps
    Legs legs{};

    void validate() const;
};

/// error = i_ref - i per phase; above +band the upper switch turns on, below
/// -band it turns off, inside the band the previous state is kept.
Legs hysteresis_gate(const Abc& i, const Abc& i_ref, HysteresisState& state);

enum class FeedforwardFormula { per_phase, line };

struct VscConfig {
    double kp = 4.8;
    double ki = 1.0;
    double band = 0.25;
    double v_dcref = 700.0;
    double sample_period = 20e-6;
    double pi_period = 0.01;         // half of a 50 Hz cycle
    double rated_power = 32500.0;    // sets the anti-windup clamp
    double windup_factor = 1.5;
    double v_ll_rms = 415.0;         // base of the line feed-forward form
    FeedforwardFormula formula = FeedforwardFormula::per_phase;

    void validate() const;
};

struct VscOutput {
    Abc i_gref{};
    Legs legs{};
    double v_t = 0.0;
    double i_loss = 0.0;
    double i_pvf = 0.0;
    bool grid_lost = false;
};

/// Sampled grid-interface controller. The PI loss component runs once every
/// pi_period on the mean DC-link voltage of that period; templates, references
/// and hysteresis run every sample.
class VscController {
public:
    explicit VscController(const VscConfig& cfg);

    /// v_pcc and i_g are per-phase PCC voltages and grid currents (grid to PCC).
    VscOutput step(const Abc& v_pcc, const Abc& i_g, double v_dc, double p_pv);

    void set_dcref(double v) noexcept { cfg_.v_dcref = v; }
    double dcref() const noexcept { return cfg_.v_dcref; }
    const PiState& pi() const noexcept { return pi_; }
    const VscConfig& config() const noexcept { return cfg_; }

private:
    VscConfig cfg_;
    PiState pi_;
    HysteresisState hyst_;
    std::size_t pi_samples_ = 1;
    std::size_t count_ = 0;
    double v_dc_sum_ = 0.0;
};

} // namespace anroa::vsc
