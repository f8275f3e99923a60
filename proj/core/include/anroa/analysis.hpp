#pragma once

#include "anroa/plant_sim.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace anroa::analysis {

struct HarmonicReport {
    double fundamental = 0.0;
    std::vector<double> amplitudes; // index = harmonic order, [0] is the DC term
    double thd_percent = 0.0;
    std::size_t window_samples = 0;
    int cycles = 0;
};

/// Samples in one fundamental cycle (rounded).
std::size_t samples_per_cycle(double f0, double sample_rate);

/// Discrete Fourier analysis over the last `cycles` whole fundamental cycles of
/// the series (fewer if the series is shorter). Throws DegenerateInputError
/// when less than one cycle is available or the fundamental is zero.
HarmonicReport thd(std::span<const double> series, double f0, double sample_rate, int max_order = 50,
                   int cycles = 5);

/// Fundamental phasor (peak amplitude, sine reference) over whole cycles at the tail.
std::complex<double> fundamental_phasor(std::span<const double> series, double f0, double sample_rate,
                                        int cycles = 5);

struct PqReport {
    double p = 0.0;
    double q = 0.0;
    double unbalance_factor = 0.0;
    double positive = 0.0; // fundamental sequence magnitudes (peak)
    double negative = 0.0;
};

using PhaseSpans = std::array<std::span<const double>, 3>;

/// Mean active power, quarter-period-shift reactive power and current
/// negative/positive sequence ratio over the whole cycles at the tail.
/// Throws DegenerateInputError on length mismatch or less than one cycle.
PqReport pq(const PhaseSpans& v, const PhaseSpans& i, double f0, double sample_rate, int cycles = 5);

/// |I-| / |I+| of three fundamental phasors.
double unbalance(const std::array<std::complex<double>, 3>& phasors);

struct SegmentMetrics {
    double t_start = 0.0;
    double t_end = 0.0;
    double p_mpp = 0.0;
    double time_to_track = 0.0; // from segment start; infinity if never tracked
    double efficiency_percent = 0.0;
    double oscillation_percent = 0.0;
};

struct MpptReport {
    std::vector<SegmentMetrics> segments;
    double time_to_track = 0.0;          // first segment
    double tracking_efficiency_percent = 0.0;
    double steady_oscillation_percent = 0.0; // worst segment
};

/// Time to track: first instant after which p_pv stays within `band` of the
/// segment MPP. Steady window: the second half of the tracked interval.
/// Efficiency: integral of p_pv over integral of p_mpp on the steady windows.
/// Oscillation: peak-to-peak p_pv over p_mpp on the steady window.
MpptReport mppt_metrics(std::span<const double> time, std::span<const double> p_pv,
                        const std::vector<sim::MppSegment>& oracle, double band = 0.02);

struct Stats {
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;
    bool single = false; // one value: deviation reported as 0
};

/// Throws DegenerateInputError on an empty input.
Stats stats(std::span<const double> values);

/// Relative power-balance residual between t0 and t1:
/// |mean p_pv - mean(p_load + p_g + p_loss) - dE_dc / T| / mean p_pv.
double power_balance_residual(const sim::SimTrace& trace, double capacitance, double t0, double t1);

/// Index of the first sample at or after t.
std::size_t index_at(const sim::SimTrace& trace, double t);

struct RunSummary {
    std::string label;
    double grid_thd_percent = 0.0;
    double load_thd_percent = 0.0;
    double efficiency_percent = 0.0;
    double time_to_track = 0.0;
    double oscillation_percent = 0.0;
    double mean_abs_q = 0.0;
    double wall_seconds = 0.0;
};

/// Summary numbers of a finished run. THD and Q use the last five cycles.
RunSummary summarize(const std::string& label, const sim::SimTrace& trace, const sim::ScenarioConfig& cfg,
                     const std::vector<sim::MppSegment>& oracle, double wall_seconds);

struct ComparisonRow {
    std::string label;
    double thd_percent = 0.0;
    double efficiency_percent = 0.0;
    double time_to_track = 0.0;
    double wall_seconds = 0.0;
};

/// One row per run, sorted by label.
std::vector<ComparisonRow> compare(const std::vector<RunSummary>& runs);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
void write_comparison_text(std::ostream& out, const std::vector<ComparisonRow>& rows);

} // namespace anroa::analysis
