#include "anroa/mppt.hpp"

#include "anroa/errors.hpp"

#include <algorithm>
#include <cmath>

namespace anroa::mppt {

namespace {

double clamp_duty(double d) {
    return std::clamp(d, 0.0, kMaxDuty);
}

double signed_step(Direction dir, double magnitude) {
    switch (dir) {
    case Direction::increase:
        return magnitude;
    case Direction::decrease:
        return -magnitude;
    case Direction::hold:
        break;
    }
    return 0.0;
}

} // namespace

void MpptState::validate() const {
    if (!(duty >= 0.0 && duty <= kMaxDuty)) {
        throw ConfigError("mppt.initial_duty: must be in [0, 0.95]");
    }
    if (!(step > 0.0)) {
        throw ConfigError("mppt.step: must be > 0");
    }
    if (!(delta_d > 0.0 && delta_d < 1.0)) {
        throw ConfigError("mppt.delta_d: must be in (0, 1)");
    }
    if (!(dc_min < dc_max)) {
        throw ConfigError("mppt.dc_max: must exceed dc_min");
    }
    if (!(v_dcref >= dc_min && v_dcref <= dc_max)) {
        throw ConfigError("mppt.v_dcref: must lie in [dc_min, dc_max]");
    }
}

Direction mpp_direction(double dv, double di, double v, double i, double epsilon) {
    if (!(v > 0.0)) {
        throw ConfigError("mpp_direction: requires v > 0");
    }
    if (dv == 0.0) {
        if (di == 0.0) {
            return Direction::hold;
        }
        return di > 0.0 ? Direction::decrease : Direction::increase;
    }
    const double mismatch = di / dv + i / v;
    if (std::abs(mismatch) <= epsilon) {
        return Direction::hold;
    }
    return mismatch > 0.0 ? Direction::decrease : Direction::increase;
}

double perturb_vdcref(const MpptState& state, double dv, double di, double v, double i, double epsilon) {
    double ref = state.v_dcref;
    switch (mpp_direction(dv, di, v, i, epsilon)) {
    case Direction::decrease:
        ref += state.step;
        break;
    case Direction::increase:
        ref -= state.step;
        break;
    case Direction::hold:
        break;
    }
    return std::clamp(ref, state.dc_min, state.dc_max);
}

double dcref_floor(double v_pa, double gamma) {
    if (!(gamma >= 1.0)) {
        throw ConfigError("mppt.gamma: must be >= 1");
    }
    return gamma * std::sqrt(2.0) * v_pa;
}

AnfisScaling anfis_scaling(const pv::PvArrayConfig& cfg, const TeacherConfig& teacher) {
    return {cfg.n_parallel * cfg.module.i_sc, cfg.n_series * cfg.module.v_oc, teacher.min_step, teacher.max_step};
}

namespace {
constexpr double kDampingReset = 0.02;
} // namespace

double anfis_duty(const anfis::AnfisNet& net, const AnfisScaling& scale, double i_pv, double v_pv,
                  MpptState& state, double epsilon) {
    if (!net.trained) {
        throw ConfigError("anfis_duty: the network has not been trained");
    }
    const double magnitude = std::clamp(std::abs(anfis::forward(net, i_pv / scale.i_base, v_pv / scale.v_base)),
                                        scale.min_step, scale.max_step);
    Direction dir = Direction::increase;
    if (state.primed) {
        dir = v_pv > 0.0 ? mpp_direction(v_pv - state.prev_v, i_pv - state.prev_i, v_pv, i_pv, epsilon)
                         : Direction::decrease;
    }
    const double p = v_pv * i_pv;
    if (state.primed && std::abs(p - state.prev_p) > kDampingReset * std::max(std::abs(p), 1e-9)) {
        state.damping = 1.0;
    }
    if (dir != Direction::hold) {
        const int move = dir == Direction::increase ? 1 : -1;
        if (state.last_move != 0 && move != state.last_move) {
            state.damping *= 0.5;
        }
        state.last_move = move;
    }
    state.primed = true;
    state.prev_v = v_pv;
    state.prev_i = i_pv;
    state.prev_p = p;
    state.duty = clamp_duty(state.duty + signed_step(dir, std::max(magnitude * state.damping, scale.min_step)));
    return state.duty;
}

double po_baseline(MpptState& state, double v, double i, double p_prev) {
    const double p = v * i;
    if (state.primed && p < p_prev) {
        state.po_sign = -state.po_sign;
    }
    state.primed = true;
    state.prev_v = v;
    state.prev_i = i;
    state.prev_p = p;
    state.duty = clamp_duty(state.duty + state.po_sign * state.delta_d);
    return state.duty;
}

void TeacherConfig::validate() const {
    if (irradiance.empty() || points_per_curve < 2) {
        throw ConfigError("teacher: needs at least one irradiance and two points per curve");
    }
    if (!(v_lo_frac >= 0.0 && v_lo_frac < v_hi_frac && v_hi_frac <= 1.0)) {
        throw ConfigError("teacher: requires 0 <= v_lo_frac < v_hi_frac <= 1");
    }
    if (!(v_dc > 0.0 && gain > 0.0 && min_step > 0.0 && min_step <= max_step)) {
        throw ConfigError("teacher: requires positive v_dc, gain and 0 < min_step <= max_step");
    }
    for (double g : irradiance) {
        if (!(g > 0.0 && g <= 1500.0)) {
            throw ConfigError("teacher.irradiance: values must be in (0, 1500]");
        }
    }
}

double teacher_step(const TeacherConfig& teacher, double v, double v_mpp) {
    return std::clamp(teacher.gain * std::abs(v - v_mpp) / teacher.v_dc, teacher.min_step, teacher.max_step);
}

anfis::TrainingSet teacher_dataset(const pv::PvArrayConfig& cfg, const TeacherConfig& teacher,
                                   anfis::TrainingSet* holdout, int holdout_every) {
    teacher.validate();
    pv::validate(cfg);
    const auto scale = anfis_scaling(cfg, teacher);
    anfis::TrainingSet data;
    int counter = 0;
    for (double g : teacher.irradiance) {
        pv::PvArrayConfig curve = cfg;
        curve.sections = {pv::Section{cfg.n_series, g}};
        const double v_mpp = pv::true_mpp(curve).v;
        const double v_oc = pv::array_open_circuit_voltage(curve);
        for (int k = 0; k < teacher.points_per_curve; ++k) {
            const double frac = teacher.v_lo_frac + (teacher.v_hi_frac - teacher.v_lo_frac) * k /
                                                        (teacher.points_per_curve - 1);
            const double v = frac * v_oc;
            const anfis::Sample s{pv::array_current(curve, v) / scale.i_base, v / scale.v_base,
                                  teacher_step(teacher, v, v_mpp)};
            if (holdout != nullptr && holdout_every > 0 && ++counter % holdout_every == 0) {
                holdout->push_back(s);
            } else {
                data.push_back(s);
            }
        }
    }
    return data;
}

anfis::TrainResult train_teacher(const pv::PvArrayConfig& cfg, const TeacherConfig& teacher,
                                 std::size_t mfs_per_input, int epochs, double learning_rate) {
    const auto data = teacher_dataset(cfg, teacher);
    return anfis::hybrid_train(anfis::initialize(data, mfs_per_input), data, epochs, learning_rate);
}

} // namespace anroa::mppt
