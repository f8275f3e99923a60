#pragma once

#include "anroa/anfis.hpp"
#include "anroa/pv_array.hpp"

#include <string>
#include <vector>

namespace anroa::mppt {

/// Which way the boost duty should move to approach the maximum power point.
/// `decrease` raises the PV voltage, `increase` lowers it.
enum class Direction { decrease, hold, increase };

inline constexpr double kMaxDuty = 0.95;

struct MpptState {
    double duty = 0.2;
    double prev_v = 0.0;
    double prev_i = 0.0;
    double prev_p = 0.0;
    double v_dcref = 700.0;
    double step = 1.0;      // volts per reference perturbation
    double delta_d = 0.005; // fixed duty perturbation (P&O)
    double dc_min = 700.0;
    double dc_max = 800.0;
    int po_sign = 1;        // last P&O duty move, +1 or -1
    int last_move = 0;      // last ANFIS move, +1, -1 or 0 before the first
    double damping = 1.0;   // ANFIS step multiplier
    bool primed = false;    // prev_* hold a real sample

    void validate() const;
};

/// Incremental-conductance decision. With dv != 0 compares di/dv against -i/v
/// and holds inside |di/dv + i/v| <= epsilon; with dv == 0 decides on di alone.
Direction mpp_direction(double dv, double di, double v, double i, double epsilon = 1e-3);

/// Six-case DC-link reference update, clamped to [dc_min, dc_max].
double perturb_vdcref(const MpptState& state, double dv, double di, double v, double i, double epsilon = 1e-3);

/// gamma * sqrt(2) * v_pa, the lowest DC-link voltage the VSC can work with.
double dcref_floor(double v_pa, double gamma);

/// ANFIS inputs are current over i_base and voltage over v_base; the output
/// magnitude is limited to [min_step, max_step].
struct AnfisScaling {
    double i_base = 1.0;
    double v_base = 1.0;
    double min_step = 0.0005;
    double max_step = 0.05;
};

/// One ANFIS-driven duty update. The network gives the step size from the
/// scaled (i_pv, v_pv); the incremental-conductance rule gives the sign. Each
/// reversal halves the step multiplier (the step never drops below min_step);
/// a power change above 2% between calls restores it to 1. The first call only primes the history
/// and takes one step toward lower voltage.
double anfis_duty(const anfis::AnfisNet& net, const AnfisScaling& scale, double i_pv, double v_pv,
                  MpptState& state, double epsilon = 1e-3);

/// Perturb and observe with fixed step state.delta_d.
double po_baseline(MpptState& state, double v, double i, double p_prev);

/// Step-size teacher used to build the ANFIS training set.
struct TeacherConfig {
    std::vector<double> irradiance{200, 250, 300, 350, 400, 450, 500, 550, 600,
                                   650, 700, 750, 800, 850, 900, 950, 1000};
    int points_per_curve = 80;
    double v_lo_frac = 0.35;   // sampled span, as fractions of the array open-circuit voltage
    double v_hi_frac = 0.97;
    double v_dc = 700.0;
    double gain = 0.5;         // step = gain * |v - v_mpp| / v_dc before clamping
    double min_step = 0.0005;
    double max_step = 0.05;

    void validate() const;
};

/// Input and output scaling matching a teacher on this array.
AnfisScaling anfis_scaling(const pv::PvArrayConfig& cfg, const TeacherConfig& teacher);

/// Teacher step magnitude at PV voltage v for a curve whose MPP sits at v_mpp.
double teacher_step(const TeacherConfig& teacher, double v, double v_mpp);

/// Samples the teacher over uniform-irradiance curves of the array.
/// Every `holdout_every`-th sample goes to `holdout` when it is non-null.
anfis::TrainingSet teacher_dataset(const pv::PvArrayConfig& cfg, const TeacherConfig& teacher,
                                   anfis::TrainingSet* holdout = nullptr, int holdout_every = 5);

/// Builds the teacher dataset on cfg and runs hybrid training on it.
anfis::TrainResult train_teacher(const pv::PvArrayConfig& cfg, const TeacherConfig& teacher,
                                 std::size_t mfs_per_input = 4, int epochs = 50, double learning_rate = 0.01);

} // namespace anroa::mppt
