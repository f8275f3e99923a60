#include "anroa/plant_sim.hpp"

#include "anroa/errors.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

namespace anroa::sim {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kDcFloor = 50.0;

struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;
};

AlphaBeta clarke(const Abc& x) {
    return {(2.0 * x[0] - x[1] - x[2]) / 3.0, (x[1] - x[2]) / kSqrt3};
}

Abc inverse_clarke(double alpha, double beta) {
    return {alpha, -0.5 * alpha + 0.5 * kSqrt3 * beta, -0.5 * alpha - 0.5 * kSqrt3 * beta};
}

Abc grid_emf(const GridParams& g, double t) {
    const double w = 2.0 * std::numbers::pi * g.freq * t;
    const double v = g.phase_peak();
    return {v * std::sin(w), v * std::sin(w - 2.0 * std::numbers::pi / 3.0),
            v * std::sin(w + 2.0 * std::numbers::pi / 3.0)};
}

void require(bool ok, const std::string& field, const std::string& constraint) {
    if (!ok) {
        throw ConfigError(field + ": " + constraint);
    }
}

/// Grid inductance, VSC filter and ripple filter in the alpha-beta frame with
/// the grid emf carried as an oscillator, advanced by the exact discrete-time
/// solution for inputs held over the step.
///
/// State: [ig_a, iv_a, vc_a, ig_b, iv_b, vc_b, e_a, e_b]; inputs: [vp_a, vp_b, il_a, il_b].
class Network {
public:
    using State = Eigen::Matrix<double, 8, 1>;
    using Input = Eigen::Matrix<double, 4, 1>;

    Network(const GridParams& g, const PlantParams& p, double dt) : rrf_(p.ripple_resistance) {
        Eigen::Matrix<double, 12, 12> m = Eigen::Matrix<double, 12, 12>::Zero();
        const double ls = g.source_inductance;
        const double lf = p.filter_inductance;
        const double c = p.ripple_capacitance;
        const double rrf = p.ripple_resistance;
        for (int axis = 0; axis < 2; ++axis) {
            const int o = 3 * axis;
            const int ig = o;
            const int iv = o + 1;
            const int vc = o + 2;
            const int e = 6 + axis;
            const int vp = 8 + axis;
            const int il = 10 + axis;
            // v_pcc = vc + rrf (ig + iv - il)
            m(ig, e) = 1.0 / ls;
            m(ig, vc) = -1.0 / ls;
            m(ig, ig) = -(rrf + g.source_resistance) / ls;
            m(ig, iv) = -rrf / ls;
            m(ig, il) = rrf / ls;

            m(iv, vp) = 1.0 / lf;
            m(iv, vc) = -1.0 / lf;
            m(iv, ig) = -rrf / lf;
            m(iv, iv) = -(rrf + p.filter_resistance) / lf;
            m(iv, il) = rrf / lf;

            m(vc, ig) = 1.0 / c;
            m(vc, iv) = 1.0 / c;
            m(vc, il) = -1.0 / c;
        }
        const double w = 2.0 * std::numbers::pi * g.freq;
        m(6, 7) = -w;
        m(7, 6) = w;
        const Eigen::Matrix<double, 12, 12> ed = (m * dt).exp();
        phi_ = ed.topLeftCorner<8, 8>();
        gamma_ = ed.topRightCorner<8, 4>();

        const Abc e0 = grid_emf(g, 0.0);
        const auto e = clarke(e0);
        x_.setZero();
        x_(2) = e.alpha;
        x_(5) = e.beta;
        x_(6) = e.alpha;
        x_(7) = e.beta;
    }

    void step(const Abc& v_pole, const Abc& i_load) {
        const auto vp = clarke(v_pole);
        const auto il = clarke(i_load);
        Input u;
        u << vp.alpha, vp.beta, il.alpha, il.beta;
        x_ = phi_ * x_ + gamma_ * u;
    }

    Abc grid_currents() const { return inverse_clarke(x_(0), x_(3)); }
    Abc vsc_currents() const { return inverse_clarke(x_(1), x_(4)); }
    Abc ripple_voltages() const { return inverse_clarke(x_(2), x_(5)); }

    /// PCC voltage drop per amp of load current.
    double load_resistance() const { return rrf_; }

    Abc pcc_voltages(const Abc& i_load) const {
        const auto il = clarke(i_load);
        return inverse_clarke(x_(2) + rrf_ * (x_(0) + x_(1) - il.alpha), x_(5) + rrf_ * (x_(3) + x_(4) - il.beta));
    }

private:
    double rrf_;
    Eigen::Matrix<double, 8, 8> phi_;
    Eigen::Matrix<double, 8, 4> gamma_;
    State x_;
};

/// Stiff grid: the PCC is the grid emf, the VSC currents use the explicit update.
class StiffNetwork {
public:
    StiffNetwork(const GridParams& g, const PlantParams& p, double dt) : g_(g), p_(p), dt_(dt) {
        vc_ = grid_emf(g, 0.0);
    }

    void step(const Legs& legs, double v_dc, const Abc& i_load, double t) {
        const Abc v = grid_emf(g_, t);
        iv_ = step_vsc_currents(iv_, legs, v_dc, v, p_.filter_inductance, p_.filter_resistance, dt_);
        const Abc v_next = grid_emf(g_, t + dt_);
        const double decay = std::exp(-dt_ / (p_.ripple_resistance * p_.ripple_capacitance));
        for (std::size_t k = 0; k < 3; ++k) {
            vc_[k] = v_next[k] + (vc_[k] - v_next[k]) * decay;
        }
        t_ = t + dt_;
        (void)i_load;
    }

    Abc pcc_voltages(const Abc&) const { return grid_emf(g_, t_); }
    double load_resistance() const { return 0.0; }
    Abc vsc_currents() const { return iv_; }
    Abc ripple_voltages() const { return vc_; }

    Abc grid_currents(const Abc& i_load) const {
        const Abc v = grid_emf(g_, t_);
        Abc ig{};
        for (std::size_t k = 0; k < 3; ++k) {
            ig[k] = i_load[k] + (v[k] - vc_[k]) / p_.ripple_resistance - iv_[k];
        }
        return ig;
    }

private:
    GridParams g_;
    PlantParams p_;
    double dt_;
    double t_ = 0.0;
    Abc iv_{};
    Abc vc_{};
};

double weighted_irradiance(const pv::PvArrayConfig& cfg) {
    double sum = 0.0;
    int modules = 0;
    for (const auto& s : pv::effective_sections(cfg)) {
        sum += s.irradiance * s.modules;
        modules += s.modules;
    }
    return modules > 0 ? sum / modules : 0.0;
}

bool finite_all(const Abc& x) {
    return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

} // namespace

double GridParams::phase_peak() const {
    return std::sqrt(2.0 / 3.0) * v_ll_rms;
}

void GridParams::validate() const {
    require(v_ll_rms > 0.0, "grid.v_ll_rms", "must be > 0");
    require(freq > 0.0, "grid.freq", "must be > 0");
    require(source_inductance >= 0.0, "grid.source_inductance", "must be >= 0");
    require(source_resistance >= 0.0, "grid.source_resistance", "must be >= 0");
}

void PlantParams::validate() const {
    require(dc_capacitance > 0.0, "plant.dc_capacitance", "must be > 0");
    require(v_dc0 > kDcFloor, "plant.v_dc0", "must exceed 50 V");
    require(boost_inductance > 0.0, "plant.boost_inductance", "must be > 0");
    require(filter_inductance > 0.0, "plant.filter_inductance", "must be > 0");
    require(filter_resistance >= 0.0, "plant.filter_resistance", "must be >= 0");
    require(ripple_resistance > 0.0, "plant.ripple_resistance", "must be > 0");
    require(ripple_capacitance > 0.0, "plant.ripple_capacitance", "must be > 0");
    require(current_rating > 0.0, "plant.current_rating", "must be > 0");
}

void LoadConfig::validate() const {
    require(bridge_r > 0.0, "load.bridge_r", "must be > 0");
    require(bridge_l >= 0.0, "load.bridge_l", "must be >= 0");
    if (phase_disconnect) {
        require(phase_disconnect->phase >= 0 && phase_disconnect->phase <= 2, "load.phase_disconnect.phase",
                "must be a, b or c");
        require(phase_disconnect->t_on < phase_disconnect->t_off, "load.phase_disconnect.t_off",
                "must be later than t_on");
    }
}

void MpptSettings::validate() const {
    require(period > 0.0, "mppt.period", "must be > 0");
    require(initial_duty >= 0.0 && initial_duty <= mppt::kMaxDuty, "mppt.initial_duty", "must be in [0, 0.95]");
    require(delta_d > 0.0 && delta_d < 1.0, "mppt.delta_d", "must be in (0, 1)");
    require(epsilon >= 0.0, "mppt.epsilon", "must be >= 0");
    require(vref_step > 0.0, "mppt.vref_step", "must be > 0");
    require(gamma >= 1.0, "mppt.gamma", "must be >= 1");
    require(dcref_duty >= 0.0 && dcref_duty <= mppt::kMaxDuty, "mppt.dcref_duty", "must be in [0, 0.95]");
    require(anfis_mfs >= 1, "mppt.anfis_mfs", "must be >= 1");
    require(anfis_epochs >= 1, "mppt.anfis_epochs", "must be >= 1");
    require(anfis_learning_rate > 0.0, "mppt.anfis_learning_rate", "must be > 0");
    teacher.validate();
}

void TuningSettings::validate() const {
    require(episode > 0.0 && episode <= 0.2, "tuning.episode", "must be in (0, 0.2] s");
    require(dc_weight >= 0.0, "tuning.dc_weight", "must be >= 0");
    for (std::size_t k = 0; k < bounds.size(); ++k) {
        require(bounds[k].first <= bounds[k].second && bounds[k].first >= 0.0,
                "tuning.bounds[" + std::to_string(k) + "]", "requires 0 <= low <= high");
    }
    require(bounds[2].first > 0.0, "tuning.bounds[2]", "band must stay > 0");
    require(population >= 2, "tuning.population", "must be >= 2");
    require(iterations >= 1, "tuning.iterations", "must be >= 1");
}

void ScenarioConfig::validate() const {
    require(step > 0.0 && step <= 20e-6, "step", "must be in (0, 20e-6] s");
    require(duration >= 5.0 / grid.freq - 1e-12, "duration", "must cover at least 5 fundamental cycles");
    pv::validate(array);
    grid.validate();
    plant.validate();
    load.validate();
    mppt.validate();
    vsc.validate();
    tuning.validate();
    require(vsc.sample_period >= step, "vsc.sample_period", "must be >= step");
    require(mppt.period >= vsc.sample_period, "mppt.period", "must be >= vsc.sample_period");
    require(tuning.episode >= 5.0 / grid.freq - 1e-12, "tuning.episode", "must cover at least 5 fundamental cycles");
    const auto sections = pv::effective_sections(array).size();
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const std::string field = "schedule[" + std::to_string(k) + "]";
        require(schedule[k].time >= 0.0, field + ".time", "must be >= 0");
        require(k == 0 || schedule[k].time > schedule[k - 1].time, field + ".time", "times must be ascending");
        require(schedule[k].irradiance.size() == sections, field + ".irradiance",
                "needs one value per array section (" + std::to_string(sections) + ")");
        for (double g : schedule[k].irradiance) {
            require(g >= 0.0 && g <= 1500.0, field + ".irradiance", "values must be in [0, 1500]");
        }
    }
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.array.module = pv::fit_module(cfg.array.module);
    return cfg;
}

double step_boost(double i_l, double duty, double v_pv, double v_dc, double inductance, double dt) {
    return std::max(i_l + dt / inductance * (v_pv - (1.0 - duty) * v_dc), 0.0);
}

std::pair<double, double> step_boost_implicit(double i_l, double duty, double v_dc, const pv::IvTable& curve,
                                              double inductance, double dt) {
    const double v_out = (1.0 - duty) * v_dc;
    const double k = inductance / dt;
    // h(v) = k (I(v) - i_l) - v + v_out decreases in v; its root is the new PV voltage.
    auto h = [&](double v) { return k * (curve.current(v) - i_l) - v + v_out; };
    const double v_oc = curve.v_oc();
    if (h(v_oc) >= 0.0) {
        return {0.0, v_oc};
    }
    if (h(0.0) <= 0.0) {
        // Inductor current beyond short circuit: the array clamps at 0 V.
        return {std::max(i_l - v_out / k, 0.0), 0.0};
    }
    double lo = 0.0;
    double hi = v_oc;
    for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) > 0.0 ? lo : hi) = mid;
    }
    const double v = 0.5 * (lo + hi);
    return {curve.current(v), v};
}

double step_dclink(double v_dc, double p_in, double p_out, double capacitance, double dt, double time) {
    if (!(v_dc > 0.0)) {
        throw SimulationFault(time, "DC link voltage is not positive");
    }
    const double next = v_dc + dt * (p_in - p_out) / (capacitance * v_dc);
    if (!(next >= kDcFloor)) {
        throw SimulationFault(time, "DC link voltage collapsed below 50 V");
    }
    return next;
}

Abc pole_voltages(const Legs& legs, double v_dc) {
    Abc v{};
    for (std::size_t k = 0; k < 3; ++k) {
        v[k] = legs[k] ? 0.5 * v_dc : -0.5 * v_dc;
    }
    const double common = (v[0] + v[1] + v[2]) / 3.0;
    for (auto& x : v) {
        x -= common;
    }
    return v;
}

Abc step_vsc_currents(const Abc& i, const Legs& legs, double v_dc, const Abc& v_pcc, double inductance,
                      double resistance, double dt) {
    const Abc vp = pole_voltages(legs, v_dc);
    Abc out{};
    for (std::size_t k = 0; k < 3; ++k) {
        out[k] = i[k] + dt / inductance * (vp[k] - v_pcc[k] - resistance * i[k]);
    }
    return out;
}

namespace {

/// Rail level of a diode group sharing `current` through a common resistance:
/// conducting phases end at the same voltage. `sign` is +1 for the upper rail.
double fill_rail(const Abc& v, const std::array<int, 3>& order, int count, double current, double r, double sign,
                 Abc& out) {
    int m = 1;
    double sum = v[order[0]];
    double level = sum - sign * r * current;
    while (m < count) {
        const double next = v[order[m]];
        if (sign * (level - next) >= 0.0) {
            break;
        }
        sum += next;
        ++m;
        level = (sum - sign * r * current) / m;
    }
    for (int k = 0; k < m; ++k) {
        out[order[k]] = m == 1 ? sign * current : sign * (sign * (v[order[k]] - level)) / r;
    }
    return level;
}

} // namespace

Abc bridge_load(const Abc& v, double& i_dc, const LoadConfig& cfg, double dt, int open, double r_source) {
    std::array<int, 3> idx{};
    int n = 0;
    for (int k = 0; k < 3; ++k) {
        if (k != open) {
            idx[n++] = k;
        }
    }
    std::sort(idx.begin(), idx.begin() + n, [&](int a, int b) { return v[a] > v[b]; });
    Abc out{};
    double v_rect = v[idx[0]] - v[idx[n - 1]];
    if (cfg.bridge_l <= 0.0) {
        i_dc = std::max(v_rect / cfg.bridge_r, 0.0);
    }
    if (i_dc > 0.0) {
        if (r_source > 0.0 && n == 3) {
            // The middle phase may share one rail: upper if it sits closer to the top.
            const bool mid_up = v[idx[0]] - v[idx[1]] < v[idx[1]] - v[idx[2]];
            const std::array<int, 3> up{idx[0], idx[1], idx[2]};
            const std::array<int, 3> down{idx[2], idx[1], idx[0]};
            const double hi = fill_rail(v, up, mid_up ? 2 : 1, i_dc, r_source, 1.0, out);
            const double lo = fill_rail(v, down, mid_up ? 1 : 2, i_dc, r_source, -1.0, out);
            v_rect = hi - lo;
        } else {
            out[idx[0]] = i_dc;
            out[idx[n - 1]] = -i_dc;
            v_rect -= 2.0 * r_source * i_dc;
        }
    }
    if (cfg.bridge_l > 0.0) {
        const double target = v_rect / cfg.bridge_r;
        i_dc = std::max(target + (i_dc - target) * std::exp(-cfg.bridge_r * dt / cfg.bridge_l), 0.0);
    }
    return out;
}

void SimTrace::reserve(std::size_t n) {
    for (auto* c : columns()) {
        c->reserve(n);
    }
}

std::vector<std::string> SimTrace::column_names() const {
    return {"time",    "v_g_a",   "v_g_b",   "v_g_c",    "i_g_a",    "i_g_b",    "i_g_c",   "i_load_a",
            "i_load_b", "i_load_c", "i_vsc_a", "i_vsc_b",  "i_vsc_c",  "i_gref_a", "i_gref_b", "i_gref_c",
            "v_dc",    "v_dcref", "p_pv",    "i_pv",     "v_pv",     "p_g",      "q_g",     "p_load",
            "p_loss",  "duty",    "irradiance"};
}

std::vector<const std::vector<double>*> SimTrace::columns() const {
    return {&time,      &v_g[0],    &v_g[1],    &v_g[2],     &i_g[0],     &i_g[1],     &i_g[2],
            &i_load[0], &i_load[1], &i_load[2], &i_vsc[0],   &i_vsc[1],   &i_vsc[2],   &i_gref[0],
            &i_gref[1], &i_gref[2], &v_dc,      &v_dcref,    &p_pv,       &i_pv,       &v_pv,
            &p_g,       &q_g,       &p_load,    &p_loss,     &duty,       &irradiance};
}

std::vector<std::vector<double>*> SimTrace::columns() {
    std::vector<std::vector<double>*> out;
    for (const auto* c : std::as_const(*this).columns()) {
        out.push_back(const_cast<std::vector<double>*>(c));
    }
    return out;
}

pv::PvArrayConfig array_at(const ScenarioConfig& cfg, double t) {
    pv::PvArrayConfig out = cfg.array;
    for (const auto& ev : cfg.schedule) {
        if (ev.time <= t) {
            out = pv::with_irradiance(cfg.array, ev.irradiance);
        }
    }
    return out;
}

std::vector<MppSegment> mpp_schedule(const ScenarioConfig& cfg) {
    std::vector<double> edges{0.0};
    for (const auto& ev : cfg.schedule) {
        if (ev.time > 0.0 && ev.time < cfg.duration) {
            edges.push_back(ev.time);
        }
    }
    edges.push_back(cfg.duration);
    std::vector<MppSegment> out;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        out.push_back({edges[k], edges[k + 1], pv::true_mpp(array_at(cfg, edges[k]))});
    }
    return out;
}

anfis::AnfisNet prepare_anfis(const ScenarioConfig& cfg) {
    if (!cfg.mppt.anfis_file.empty()) {
        std::ifstream in(cfg.mppt.anfis_file);
        if (!in) {
            throw ConfigError("mppt.anfis_file: cannot open " + cfg.mppt.anfis_file);
        }
        auto net = anfis::load(in);
        net.trained = true;
        return net;
    }
    return mppt::train_teacher(cfg.array, cfg.mppt.teacher, static_cast<std::size_t>(cfg.mppt.anfis_mfs),
                               cfg.mppt.anfis_epochs, cfg.mppt.anfis_learning_rate)
        .net;
}

namespace {

template <class Net>
SimTrace run_with(const ScenarioConfig& cfg, const anfis::AnfisNet* net, Net& network) {
    const double dt = cfg.step;
    const auto n_steps = static_cast<std::size_t>(std::llround(cfg.duration / dt));
    const auto ctrl_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.vsc.sample_period / dt)));
    const auto mppt_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.mppt.period / dt)));

    // One tabulated curve per irradiance segment.
    std::vector<double> seg_start{0.0};
    std::vector<pv::PvArrayConfig> seg_cfg{array_at(cfg, 0.0)};
    for (const auto& ev : cfg.schedule) {
        if (ev.time > 0.0) {
            seg_start.push_back(ev.time);
            seg_cfg.push_back(array_at(cfg, ev.time));
        }
    }
    std::vector<pv::IvTable> tables;
    for (const auto& c : seg_cfg) {
        tables.emplace_back(c);
    }

    vsc::VscConfig vcfg = cfg.vsc;
    vcfg.v_ll_rms = cfg.grid.v_ll_rms;
    vcfg.sample_period = static_cast<double>(ctrl_every) * dt;
    mppt::MpptState ms;
    ms.duty = cfg.mppt.variant == MpptVariant::dcref ? cfg.mppt.dcref_duty : cfg.mppt.initial_duty;
    ms.delta_d = cfg.mppt.delta_d;
    ms.step = cfg.mppt.vref_step;
    ms.dc_min = mppt::dcref_floor(cfg.grid.v_ll_rms, cfg.mppt.gamma);
    ms.dc_max = std::max(cfg.mppt.dc_max, ms.dc_min + ms.step);
    if (cfg.mppt.variant == MpptVariant::dcref) {
        vcfg.v_dcref = ms.dc_min;
    }
    ms.v_dcref = vcfg.v_dcref;
    vsc::VscController ctl(vcfg);
    const auto scale = mppt::anfis_scaling(cfg.array, cfg.mppt.teacher);

    SimTrace trace;
    trace.step = dt;
    trace.reserve(n_steps + 1);

    double v_dc = cfg.plant.v_dc0;
    double i_l = 0.0;
    double v_pv = tables.front().v_oc();
    double i_dc = 0.0;
    std::size_t seg = 0;
    Legs legs{};
    Abc i_gref{};
    const double i_limit = 5.0 * cfg.plant.current_rating;

    for (std::size_t n = 0;; ++n) {
        const double t = static_cast<double>(n) * dt;
        try {
            while (seg + 1 < seg_start.size() && t >= seg_start[seg + 1] - 0.5 * dt) {
                ++seg;
            }
            int open = -1;
            if (cfg.load.phase_disconnect && t >= cfg.load.phase_disconnect->t_on &&
                t < cfg.load.phase_disconnect->t_off) {
                open = cfg.load.phase_disconnect->phase;
            }
            const Abc i_load =
                bridge_load(network.pcc_voltages(Abc{}), i_dc, cfg.load, dt, open, network.load_resistance());
            const Abc v_pcc = network.pcc_voltages(i_load);
            Abc i_g{};
            if constexpr (std::is_same_v<Net, StiffNetwork>) {
                i_g = network.grid_currents(i_load);
            } else {
                i_g = network.grid_currents();
            }
            const Abc i_v = network.vsc_currents();
            const double p_pv = v_pv * i_l;

            if (n > 0 && n % mppt_every == 0) {
                switch (cfg.mppt.variant) {
                case MpptVariant::anfis:
                    mppt::anfis_duty(*net, scale, i_l, v_pv, ms, cfg.mppt.epsilon);
                    break;
                case MpptVariant::po:
                    mppt::po_baseline(ms, v_pv, i_l, ms.prev_p);
                    break;
                case MpptVariant::dcref:
                    if (ms.primed) {
                        ms.v_dcref = mppt::perturb_vdcref(ms, v_pv - ms.prev_v, i_l - ms.prev_i, std::max(v_pv, 1e-9),
                                                          i_l, cfg.mppt.epsilon);
                    } else {
                        ms.v_dcref = std::min(ms.v_dcref + ms.step, ms.dc_max);
                    }
                    ms.primed = true;
                    ms.prev_v = v_pv;
                    ms.prev_i = i_l;
                    ctl.set_dcref(ms.v_dcref);
                    break;
                }
            }
            if (n % ctrl_every == 0) {
                const auto out = ctl.step(v_pcc, i_g, v_dc, p_pv);
                if (out.grid_lost) {
                    throw SimulationFault(t, "PCC voltage below the dead-voltage floor");
                }
                legs = out.legs;
                i_gref = out.i_gref;
            }

            // Record the sample at t.
            double p_load = 0.0;
            double p_g = 0.0;
            double p_loss = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                p_load += v_pcc[k] * i_load[k];
                p_g -= v_pcc[k] * i_g[k];
                const double i_rf = i_g[k] + i_v[k] - i_load[k];
                p_loss += cfg.plant.filter_resistance * i_v[k] * i_v[k] + cfg.plant.ripple_resistance * i_rf * i_rf;
            }
            const double q_g = -((v_pcc[1] - v_pcc[2]) * i_g[0] + (v_pcc[2] - v_pcc[0]) * i_g[1] +
                                 (v_pcc[0] - v_pcc[1]) * i_g[2]) /
                               kSqrt3;
            trace.time.push_back(t);
            for (std::size_t k = 0; k < 3; ++k) {
                trace.v_g[k].push_back(v_pcc[k]);
                trace.i_g[k].push_back(i_g[k]);
                trace.i_load[k].push_back(i_load[k]);
                trace.i_vsc[k].push_back(i_v[k]);
                trace.i_gref[k].push_back(i_gref[k]);
            }
            trace.v_dc.push_back(v_dc);
            trace.v_dcref.push_back(ctl.dcref());
            trace.p_pv.push_back(p_pv);
            trace.i_pv.push_back(i_l);
            trace.v_pv.push_back(v_pv);
            trace.p_g.push_back(p_g);
            trace.q_g.push_back(q_g);
            trace.p_load.push_back(p_load);
            trace.p_loss.push_back(p_loss);
            trace.duty.push_back(ms.duty);
            trace.irradiance.push_back(weighted_irradiance(seg_cfg[seg]));

            if (n == n_steps) {
                break;
            }

            // Advance the plant over [t, t + dt].
            const Abc v_pole = pole_voltages(legs, v_dc);
            if constexpr (std::is_same_v<Net, StiffNetwork>) {
                network.step(legs, v_dc, i_load, t);
            } else {
                network.step(v_pole, i_load);
            }
            const Abc i_v_next = network.vsc_currents();
            const auto [i_l_next, v_pv_next] =
                step_boost_implicit(i_l, ms.duty, v_dc, tables[seg], cfg.plant.boost_inductance, dt);
            i_l = i_l_next;
            v_pv = v_pv_next;
            double p_out = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                p_out += v_pole[k] * 0.5 * (i_v[k] + i_v_next[k]);
            }
            v_dc = step_dclink(v_dc, v_pv * i_l, p_out, cfg.plant.dc_capacitance, dt, t);
            if (!finite_all(i_v_next) || !std::isfinite(i_l) || !std::isfinite(v_dc)) {
                throw SimulationFault(t + dt, "non-finite plant state");
            }
            for (double x : i_v_next) {
                if (std::abs(x) > i_limit) {
                    throw SimulationFault(t + dt, "VSC current exceeds five times its rating");
                }
            }
        } catch (const SimulationFault& f) {
            trace.faulted = true;
            trace.fault_time = f.time();
            trace.fault_message = f.what();
            return trace;
        } catch (const std::runtime_error& e) {
            trace.faulted = true;
            trace.fault_time = t;
            trace.fault_message = e.what();
            return trace;
        }
    }
    return trace;
}

} // namespace

SimTrace run_scenario(const ScenarioConfig& cfg, const anfis::AnfisNet* net) {
    cfg.validate();
    anfis::AnfisNet local;
    if (cfg.mppt.variant == MpptVariant::anfis && net == nullptr) {
        local = prepare_anfis(cfg);
        net = &local;
    }
    if (cfg.grid.source_inductance > 0.0) {
        Network network(cfg.grid, cfg.plant, cfg.step);
        return run_with(cfg, net, network);
    }
    StiffNetwork network(cfg.grid, cfg.plant, cfg.step);
    return run_with(cfg, net, network);
}

} // namespace anroa::sim
