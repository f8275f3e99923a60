#include "anroa/pv_array.hpp"

#include "anroa/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

namespace anroa::pv {

namespace {

constexpr double kBoltzmannOverCharge = 8.617333262e-5; // V/K
constexpr double kKelvin = 273.15;
constexpr int kMaxIterations = 100;
constexpr double kResidualTol = 1e-9;

double thermal_voltage(const PvModuleParams& m, double t) {
    return m.ideality * m.cells_in_series * kBoltzmannOverCharge * (t + kKelvin);
}

/// Photocurrent and saturation current at irradiance g and temperature t.
struct DiodeState {
    double i_photo;
    double i_sat;
    double vt;
};

DiodeState diode_state(const PvModuleParams& m, double g, double t) {
    const double dt = t - m.ref_temp;
    const double vt = thermal_voltage(m, t);
    const double vt_ref = thermal_voltage(m, m.ref_temp);
    // Saturation current follows the open-circuit temperature shift, anchored at the fit.
    const double scale = ((m.i_sc + m.ki_isc * dt) / std::expm1((m.v_oc + m.kv_voc * dt) / vt)) /
                         (m.i_sc / std::expm1(m.v_oc / vt_ref));
    return {(m.i_photo + m.ki_isc * dt) * g / m.ref_irradiance, m.i_sat * scale, vt};
}

/// Newton iteration kept inside a shrinking sign bracket; f must be decreasing.
template <class F>
double safeguarded_newton(F&& f, double lo, double hi, double x0, const char* what) {
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < kMaxIterations; ++it) {
        const auto [fx, dfx] = f(x);
        if (std::abs(fx) < kResidualTol) {
            return x;
        }
        if (fx > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        double next = (dfx != 0.0) ? x - fx / dfx : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
            return next;
        }
        x = next;
    }
    throw ModelError(std::string(what) + ": root finder did not converge in " +
                     std::to_string(kMaxIterations) + " iterations");
}

double string_voltage(const PvArrayConfig& cfg, const std::vector<Section>& sections, double i) {
    double v = 0.0;
    for (const auto& s : sections) {
        const double vs = s.modules * module_voltage(cfg.module, i, s.irradiance, cfg.temperature);
        v += std::max(vs, -cfg.bypass_drop);
    }
    return v;
}

bool uniform(const std::vector<Section>& sections) {
    return std::all_of(sections.begin(), sections.end(),
                       [&](const Section& s) { return s.irradiance == sections.front().irradiance; });
}

} // namespace

PvModuleParams fit_module(PvModuleParams m) {
    if (!(m.v_oc > m.v_mp && m.v_mp > 0.0)) {
        throw ConfigError("pv_array.module: requires v_oc > v_mp > 0");
    }
    if (!(m.i_sc > m.i_mp && m.i_mp > 0.0)) {
        throw ConfigError("pv_array.module: requires i_sc > i_mp > 0");
    }
    if (!(m.ideality > 0.0) || m.cells_in_series < 1) {
        throw ConfigError("pv_array.module: ideality and cells_in_series must be positive");
    }
    const double vt = thermal_voltage(m, m.ref_temp);
    const double voc = m.v_oc;
    const double isc = m.i_sc;
    const double vmp = m.v_mp;
    const double imp = m.i_mp;

    struct Derived {
        double i0, iph;
    };
    auto derive = [&](double rs, double rsh) {
        const double i0 = (isc * (1.0 + rs / rsh) - voc / rsh) / (std::exp(voc / vt) - std::exp(isc * rs / vt));
        return Derived{i0, i0 * std::expm1(voc / vt) + voc / rsh};
    };
    // Residuals: current at the MPP and zero slope of p(v) there.
    auto residual = [&](double rs, double log_rsh) {
        const double rsh = std::exp(log_rsh);
        const auto d = derive(rs, rsh);
        const double e = std::exp((vmp + imp * rs) / vt);
        const double r1 = d.iph - d.i0 * (e - 1.0) - (vmp + imp * rs) / rsh - imp;
        const double g = d.i0 / vt * e + 1.0 / rsh;
        const double didv = -g / (1.0 + rs * g);
        return std::array<double, 2>{r1, didv + imp / vmp};
    };

    double rs = 0.2;
    double lr = std::log(400.0);
    bool converged = false;
    for (int it = 0; it < kMaxIterations; ++it) {
        const auto r = residual(rs, lr);
        if (std::abs(r[0]) < 1e-12 && std::abs(r[1]) < 1e-12) {
            converged = true;
            break;
        }
        const double h1 = 1e-7;
        const double h2 = 1e-6;
        const auto ra = residual(rs + h1, lr);
        const auto rb = residual(rs, lr + h2);
        const double j11 = (ra[0] - r[0]) / h1, j12 = (rb[0] - r[0]) / h2;
        const double j21 = (ra[1] - r[1]) / h1, j22 = (rb[1] - r[1]) / h2;
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) {
            break;
        }
        double drs = (j22 * r[0] - j12 * r[1]) / det;
        double dlr = (-j21 * r[0] + j11 * r[1]) / det;
        // Damp large steps; rs must stay non-negative.
        double step = 1.0;
        while (step > 1e-4 && (rs - step * drs < 0.0 || std::abs(step * dlr) > 1.0)) {
            step *= 0.5;
        }
        rs -= step * drs;
        lr -= step * dlr;
    }
    if (!converged) {
        throw ModelError("fit_module: single-diode fit did not converge for the given ratings");
    }
    const double rsh = std::exp(lr);
    const auto d = derive(rs, rsh);
    m.r_series = rs;
    m.r_shunt = rsh;
    m.i_sat = d.i0;
    m.i_photo = d.iph;
    if (!(m.i_sat > 0.0 && m.r_shunt > 0.0)) {
        throw ModelError("fit_module: fitted parameters are not physical");
    }
    return m;
}

double module_current(const PvModuleParams& m, double v, double g, double t) {
    if (!m.fitted()) {
        throw ConfigError("module_current: module parameters are not fitted");
    }
    if (v < 0.0 || g < 0.0) {
        throw ConfigError("module_current: requires v >= 0 and g >= 0");
    }
    const auto ds = diode_state(m, g, t);
    auto f = [&](double i) {
        const double e = std::exp((v + i * m.r_series) / ds.vt);
        const double fx = ds.i_photo - ds.i_sat * (e - 1.0) - (v + i * m.r_series) / m.r_shunt - i;
        const double dfx = -ds.i_sat * m.r_series / ds.vt * e - m.r_series / m.r_shunt - 1.0;
        return std::pair{fx, dfx};
    };
    // Terminal current is never negative: no photocurrent means no delivered current.
    if (f(0.0).first <= 0.0) {
        return 0.0;
    }
    try {
        return safeguarded_newton(f, 0.0, ds.i_photo, ds.i_photo, "module_current");
    } catch (const ModelError&) {
        throw ModelError("module_current: no convergence at v=" + std::to_string(v) +
                         " g=" + std::to_string(g) + " t=" + std::to_string(t));
    }
}

double module_voltage(const PvModuleParams& m, double i, double g, double t) {
    if (!m.fitted()) {
        throw ConfigError("module_voltage: module parameters are not fitted");
    }
    const auto ds = diode_state(m, g, t);
    auto f = [&](double v) {
        const double e = std::exp((v + i * m.r_series) / ds.vt);
        const double fx = ds.i_photo - ds.i_sat * (e - 1.0) - (v + i * m.r_series) / m.r_shunt - i;
        const double dfx = -ds.i_sat / ds.vt * e - 1.0 / m.r_shunt;
        return std::pair{fx, dfx};
    };
    const double hi = ds.vt * std::log1p(std::max(ds.i_photo, 0.0) / ds.i_sat + 1.0) + std::abs(i) * m.r_series + 1.0;
    const double lo = -m.r_shunt * (std::abs(i) + ds.i_sat) - std::abs(i) * m.r_series - 1.0;
    return safeguarded_newton(f, lo, hi, hi, "module_voltage");
}

std::vector<Section> effective_sections(const PvArrayConfig& cfg) {
    if (cfg.sections.empty()) {
        return {Section{cfg.n_series, 1000.0}};
    }
    return cfg.sections;
}

void validate(const PvArrayConfig& cfg) {
    if (cfg.n_series < 1 || cfg.n_parallel < 1) {
        throw ConfigError("pv_array: n_series and n_parallel must be >= 1");
    }
    if (!cfg.module.fitted()) {
        throw ConfigError("pv_array.module: parameters are not fitted");
    }
    if (!(cfg.module.r_series >= 0.0 && cfg.module.r_shunt > 0.0)) {
        throw ConfigError("pv_array.module: requires r_series >= 0 and r_shunt > 0");
    }
    int span = 0;
    for (std::size_t k = 0; k < cfg.sections.size(); ++k) {
        const auto& s = cfg.sections[k];
        if (s.modules < 1) {
            throw ConfigError("pv_array.sections[" + std::to_string(k) + "].modules: must be >= 1");
        }
        if (!(s.irradiance >= 0.0 && s.irradiance <= 1500.0)) {
            throw ConfigError("pv_array.sections[" + std::to_string(k) + "].irradiance: must be in [0, 1500]");
        }
        span += s.modules;
    }
    if (!cfg.sections.empty() && span != cfg.n_series) {
        throw ConfigError("pv_array.sections: spans cover " + std::to_string(span) +
                          " modules but n_series is " + std::to_string(cfg.n_series));
    }
    if (!(cfg.bypass_drop >= 0.0)) {
        throw ConfigError("pv_array.bypass_drop: must be >= 0");
    }
}

double array_open_circuit_voltage(const PvArrayConfig& cfg) {
    const auto sections = effective_sections(cfg);
    return std::max(string_voltage(cfg, sections, 0.0), 0.0);
}

double array_current(const PvArrayConfig& cfg, double v) {
    if (v < 0.0) {
        throw ConfigError("array_current: requires v >= 0");
    }
    const auto sections = effective_sections(cfg);
    if (uniform(sections)) {
        return cfg.n_parallel * module_current(cfg.module, v / cfg.n_series, sections.front().irradiance, cfg.temperature);
    }
    const double v_open = string_voltage(cfg, sections, 0.0);
    if (v >= v_open) {
        return 0.0;
    }
    double i_max = 0.0;
    for (const auto& s : sections) {
        i_max = std::max(i_max, diode_state(cfg.module, s.irradiance, cfg.temperature).i_photo);
    }
    i_max += 1e-3;
    auto residual = [&](double i) { return string_voltage(cfg, sections, i) - v; };
    std::uintmax_t iters = kMaxIterations;
    const auto [a, b] = boost::math::tools::toms748_solve(residual, 0.0, i_max, residual(0.0), residual(i_max),
                                                          boost::math::tools::eps_tolerance<double>(48), iters);
    if (iters >= static_cast<std::uintmax_t>(kMaxIterations)) {
        throw ModelError("array_current: string solve did not converge at v=" + std::to_string(v));
    }
    return cfg.n_parallel * std::max(0.5 * (a + b), 0.0);
}

OperatingPoint true_mpp(const PvArrayConfig& cfg) {
    validate(cfg);
    const double v_oc = array_open_circuit_voltage(cfg);
    if (v_oc <= 0.0) {
        return {};
    }
    constexpr double grid = 0.01;
    const auto n = static_cast<std::size_t>(std::ceil(v_oc / grid));
    const double h = v_oc / static_cast<double>(n);
    auto power = [&](double v) { return v * array_current(cfg, v); };
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double p = power(h * static_cast<double>(k));
        if (p > best_p) {
            best_p = p;
            best = k;
        }
    }
    // Golden-section refinement inside the neighbouring grid cells.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = h * static_cast<double>(best > 0 ? best - 1 : 0);
    double b = std::min(h * static_cast<double>(best + 1), v_oc);
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double pc = power(c);
    double pd = power(d);
    for (int it = 0; it < 60 && (b - a) > 1e-9; ++it) {
        if (pc > pd) {
            b = d;
            d = c;
            pd = pc;
            c = b - invphi * (b - a);
            pc = power(c);
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + invphi * (b - a);
            pd = power(d);
        }
    }
    const double v = 0.5 * (a + b);
    OperatingPoint op{v, array_current(cfg, v), 0.0};
    op.p = op.v * op.i;
    if (op.p < best_p) {
        op = {h * static_cast<double>(best), array_current(cfg, h * static_cast<double>(best)), best_p};
    }
    return op;
}

PvArrayConfig with_irradiance(const PvArrayConfig& cfg, const std::vector<double>& irradiance) {
    PvArrayConfig out = cfg;
    out.sections = effective_sections(cfg);
    if (irradiance.size() != out.sections.size()) {
        throw ConfigError("irradiance schedule: expected " + std::to_string(out.sections.size()) +
                          " values, got " + std::to_string(irradiance.size()));
    }
    for (std::size_t k = 0; k < irradiance.size(); ++k) {
        out.sections[k].irradiance = irradiance[k];
    }
    return out;
}

IvTable::IvTable(const PvArrayConfig& cfg, double spacing) : spacing_(spacing) {
    v_oc_ = array_open_circuit_voltage(cfg);
    const auto n = static_cast<std::size_t>(std::ceil(v_oc_ / spacing_)) + 1;
    currents_.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double v = spacing_ * static_cast<double>(k);
        currents_[k] = v >= v_oc_ ? 0.0 : array_current(cfg, v);
    }
}

double IvTable::current(double v) const {
    if (currents_.empty() || v >= v_oc_) {
        return 0.0;
    }
    if (v <= 0.0) {
        return currents_.front();
    }
    const double x = v / spacing_;
    const auto k = static_cast<std::size_t>(x);
    if (k + 1 >= currents_.size()) {
        return 0.0;
    }
    const double w = x - static_cast<double>(k);
    return std::max((1.0 - w) * currents_[k] + w * currents_[k + 1], 0.0);
}

double IvTable::voltage(double i) const {
    if (currents_.empty() || i >= currents_.front()) {
        return 0.0;
    }
    if (i <= 0.0) {
        return v_oc_;
    }
    // currents_ is non-increasing: the first entry below i closes the bracket.
    const auto it = std::partition_point(currents_.begin(), currents_.end(), [i](double c) { return c >= i; });
    const auto k = static_cast<std::size_t>(it - currents_.begin());
    if (k >= currents_.size()) {
        return v_oc_;
    }
    const double c0 = currents_[k - 1];
    const double c1 = currents_[k];
    const double w = (c0 - i) / (c0 - c1);
    return std::min(spacing_ * (static_cast<double>(k - 1) + w), v_oc_);
}

} // namespace anroa::pv
