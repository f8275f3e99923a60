#pragma once

#include <cstddef>
#include <vector>

namespace anroa::pv {

/// Datasheet ratings of one PV module plus the fitted single-diode parameters.
///
/// The ratings (v_mp, i_mp, v_oc, i_sc) are what a user specifies; the
/// remaining five-parameter set (photocurrent, saturation current, ideality,
/// series and shunt resistance) is produced by fit_module().
struct PvModuleParams {
    double v_mp = 26.3;
    double i_mp = 7.61;
    double v_oc = 32.9;
    double i_sc = 8.21;
    double ideality = 1.3;
    int cells_in_series = 54;
    double r_series = 0.0;   // ohm, filled by fit_module
    double r_shunt = 0.0;    // ohm, filled by fit_module
    double i_photo = 0.0;    // A at reference conditions, filled by fit_module
    double i_sat = 0.0;      // A at reference conditions, filled by fit_module
    double ref_irradiance = 1000.0;
    double ref_temp = 25.0;
    double ki_isc = 0.0032;  // A/K short-circuit current coefficient
    double kv_voc = -0.123;  // V/K open-circuit voltage coefficient

    bool fitted() const noexcept { return r_shunt > 0.0 && i_sat > 0.0; }
};

/// A run of series-connected modules sharing one irradiance and one bypass diode.
struct Section {
    int modules = 0;
    double irradiance = 1000.0;
};

struct PvArrayConfig {
    PvModuleParams module;
    int n_series = 18;
    int n_parallel = 9;
    /// Empty means one section spanning the whole string at 1000 W/m^2.
    std::vector<Section> sections;
    double temperature = 25.0;
    double bypass_drop = 0.7;
};

struct OperatingPoint {
    double v = 0.0;
    double i = 0.0;
    double p = 0.0;
};

/// Fit the single-diode parameters so that short circuit, open circuit and the
/// maximum power point at reference conditions are reproduced.
PvModuleParams fit_module(PvModuleParams ratings);

/// Throws ConfigError when the configuration violates its invariants.
void validate(const PvArrayConfig& cfg);

/// Module terminal current at voltage v (>= 0), irradiance g and cell temperature t.
/// Throws ModelError if the root finder does not converge.
double module_current(const PvModuleParams& params, double v, double g, double t = 25.0);

/// Inverse characteristic: module voltage that carries current i.
double module_voltage(const PvModuleParams& params, double i, double g, double t = 25.0);

/// Array current at terminal voltage v. Series sections share current, parallel
/// strings add, a section whose modules would reverse-bias is clamped at the
/// bypass diode drop. Never negative (blocking diode).
double array_current(const PvArrayConfig& cfg, double v);

/// Open-circuit voltage of one string (the array).
double array_open_circuit_voltage(const PvArrayConfig& cfg);

/// Global maximum of p(v) by dense sweep (<= 10 mV grid) and golden-section refinement.
OperatingPoint true_mpp(const PvArrayConfig& cfg);

/// Copy of cfg with section irradiances replaced (size must match the section list).
PvArrayConfig with_irradiance(const PvArrayConfig& cfg, const std::vector<double>& irradiance);

/// Effective sections of cfg (the implicit single section when the list is empty).
std::vector<Section> effective_sections(const PvArrayConfig& cfg);

/// Tabulated array I-V curve for fast evaluation inside the simulation loop.
class IvTable {
public:
    IvTable() = default;
    IvTable(const PvArrayConfig& cfg, double spacing = 0.05);

    double current(double v) const;
    /// Inverse of current(): the voltage that carries current i (0 above short circuit).
    double voltage(double i) const;
    double v_oc() const noexcept { return v_oc_; }

private:
    double spacing_ = 0.05;
    double v_oc_ = 0.0;
    std::vector<double> currents_;
};

} // namespace anroa::pv
