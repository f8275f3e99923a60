#include "anroa/analysis.hpp"

#include "anroa/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

namespace anroa::analysis {

namespace {

using cplx = std::complex<double>;

struct Window {
    std::size_t begin = 0;
    std::size_t length = 0;
    int cycles = 0;
};

Window tail_window(std::size_t size, std::size_t per_cycle, int max_cycles) {
    if (per_cycle == 0) {
        throw DegenerateInputError("analysis: sample rate too low for the fundamental");
    }
    const auto available = static_cast<int>(size / per_cycle);
    const int k = std::min(available, std::max(max_cycles, 1));
    if (k < 1) {
        throw DegenerateInputError("analysis: series shorter than one fundamental cycle");
    }
    const std::size_t len = static_cast<std::size_t>(k) * per_cycle;
    return {size - len, len, k};
}

/// DFT bin `bin` of x over [begin, begin + n).
cplx dft_bin(std::span<const double> x, const Window& w, std::size_t bin) {
    const double step = -2.0 * std::numbers::pi / static_cast<double>(w.length);
    cplx sum{0.0, 0.0};
    for (std::size_t n = 0; n < w.length; ++n) {
        const std::size_t phase = (bin * n) % w.length;
        sum += x[w.begin + n] * std::polar(1.0, step * static_cast<double>(phase));
    }
    return sum;
}

double mean_range(const std::vector<double>& x, std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t k = i0; k < i1; ++k) {
        s += x[k];
    }
    return s / static_cast<double>(i1 - i0);
}

} // namespace

std::size_t samples_per_cycle(double f0, double sample_rate) {
    if (!(f0 > 0.0 && sample_rate > 0.0)) {
        throw DegenerateInputError("analysis: frequency and sample rate must be positive");
    }
    return static_cast<std::size_t>(std::llround(sample_rate / f0));
}

HarmonicReport thd(std::span<const double> series, double f0, double sample_rate, int max_order, int cycles) {
    if (max_order < 1) {
        throw DegenerateInputError("thd: max_order must be >= 1");
    }
    const auto w = tail_window(series.size(), samples_per_cycle(f0, sample_rate), cycles);
    HarmonicReport r;
    r.window_samples = w.length;
    r.cycles = w.cycles;
    r.amplitudes.resize(static_cast<std::size_t>(max_order) + 1);
    const double n = static_cast<double>(w.length);
    for (int h = 0; h <= max_order; ++h) {
        const double mag = std::abs(dft_bin(series, w, static_cast<std::size_t>(h * w.cycles)));
        r.amplitudes[static_cast<std::size_t>(h)] = (h == 0 ? 1.0 : 2.0) * mag / n;
    }
    r.fundamental = r.amplitudes[1];
    if (!(r.fundamental > 0.0)) {
        throw DegenerateInputError("thd: zero fundamental");
    }
    double harm = 0.0;
    for (int h = 2; h <= max_order; ++h) {
        harm += r.amplitudes[static_cast<std::size_t>(h)] * r.amplitudes[static_cast<std::size_t>(h)];
    }
    r.thd_percent = 100.0 * std::sqrt(harm) / r.fundamental;
    return r;
}

std::complex<double> fundamental_phasor(std::span<const double> series, double f0, double sample_rate, int cycles) {
    const auto w = tail_window(series.size(), samples_per_cycle(f0, sample_rate), cycles);
    // Scaled so that sin(wt) maps to 1 + 0j.
    return cplx{0.0, 1.0} * 2.0 * dft_bin(series, w, static_cast<std::size_t>(w.cycles)) /
           static_cast<double>(w.length);
}

double unbalance(const std::array<std::complex<double>, 3>& ph) {
    const cplx a = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    const cplx pos = (ph[0] + a * ph[1] + a * a * ph[2]) / 3.0;
    const cplx neg = (ph[0] + a * a * ph[1] + a * ph[2]) / 3.0;
    if (std::abs(pos) == 0.0) {
        throw DegenerateInputError("unbalance: zero positive-sequence component");
    }
    return std::abs(neg) / std::abs(pos);
}

PqReport pq(const PhaseSpans& v, const PhaseSpans& i, double f0, double sample_rate, int cycles) {
    const std::size_t len = v[0].size();
    for (std::size_t k = 0; k < 3; ++k) {
        if (v[k].size() != len || i[k].size() != len) {
            throw DegenerateInputError("pq: voltage and current series must have equal lengths");
        }
    }
    const std::size_t per = samples_per_cycle(f0, sample_rate);
    const auto w = tail_window(len, per, cycles);
    const std::size_t quarter = static_cast<std::size_t>(std::llround(static_cast<double>(per) / 4.0));
    PqReport r;
    double p = 0.0;
    double q = 0.0;
    for (std::size_t n = 0; n < w.length; ++n) {
        // Voltage a quarter period earlier, taken circularly inside the whole-cycle window.
        const std::size_t shifted = w.begin + (n + w.length - quarter % w.length) % w.length;
        for (std::size_t k = 0; k < 3; ++k) {
            p += v[k][w.begin + n] * i[k][w.begin + n];
            q += v[k][shifted] * i[k][w.begin + n];
        }
    }
    r.p = p / static_cast<double>(w.length);
    r.q = q / static_cast<double>(w.length);

    std::array<cplx, 3> ph;
    for (std::size_t k = 0; k < 3; ++k) {
        ph[k] = fundamental_phasor(i[k], f0, sample_rate, cycles);
    }
    const cplx a = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    r.positive = std::abs((ph[0] + a * ph[1] + a * a * ph[2]) / 3.0);
    r.negative = std::abs((ph[0] + a * a * ph[1] + a * ph[2]) / 3.0);
    r.unbalance_factor = r.positive > 0.0 ? r.negative / r.positive : 0.0;
    return r;
}

MpptReport mppt_metrics(std::span<const double> time, std::span<const double> p_pv,
                        const std::vector<sim::MppSegment>& oracle, double band) {
    if (time.size() != p_pv.size() || time.empty()) {
        throw DegenerateInputError("mppt_metrics: time and power series must be non-empty and aligned");
    }
    if (oracle.empty() || oracle.front().t_start > time.front() + 1e-12 || oracle.back().t_end < time.back() - 1e-9) {
        throw DegenerateInputError("mppt_metrics: the oracle schedule does not cover the trace");
    }
    MpptReport report;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t s = 0; s < oracle.size(); ++s) {
        const auto& seg = oracle[s];
        const bool last = s + 1 == oracle.size();
        std::size_t i0 = 0;
        while (i0 < time.size() && time[i0] < seg.t_start - 1e-12) {
            ++i0;
        }
        std::size_t i1 = i0;
        while (i1 < time.size() && (time[i1] < seg.t_end - 1e-12 || (last && time[i1] <= seg.t_end + 1e-12))) {
            ++i1;
        }
        if (i1 - i0 < 2) {
            throw DegenerateInputError("mppt_metrics: oracle segment without samples");
        }
        SegmentMetrics m;
        m.t_start = seg.t_start;
        m.t_end = seg.t_end;
        m.p_mpp = seg.mpp.p;
        if (!(m.p_mpp > 0.0)) {
            throw DegenerateInputError("mppt_metrics: oracle power must be positive");
        }
        std::size_t track = i0;
        for (std::size_t k = i1; k-- > i0;) {
            if (std::abs(p_pv[k] - m.p_mpp) > band * m.p_mpp) {
                track = k + 1;
                break;
            }
        }
        std::size_t steady = 0;
        if (track >= i1) {
            m.time_to_track = std::numeric_limits<double>::infinity();
            steady = i0 + (i1 - i0) / 2;
        } else {
            m.time_to_track = time[track] - seg.t_start;
            steady = track + (i1 - track) / 2;
        }
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t k = steady; k < i1; ++k) {
            sum += p_pv[k];
            lo = std::min(lo, p_pv[k]);
            hi = std::max(hi, p_pv[k]);
        }
        const double count = static_cast<double>(i1 - steady);
        m.efficiency_percent = 100.0 * sum / (count * m.p_mpp);
        m.oscillation_percent = 100.0 * (hi - lo) / m.p_mpp;
        num += sum;
        den += count * m.p_mpp;
        report.segments.push_back(m);
    }
    report.time_to_track = report.segments.front().time_to_track;
    report.tracking_efficiency_percent = 100.0 * num / den;
    for (const auto& m : report.segments) {
        report.steady_oscillation_percent = std::max(report.steady_oscillation_percent, m.oscillation_percent);
    }
    return report;
}

Stats stats(std::span<const double> values) {
    if (values.empty()) {
        throw DegenerateInputError("stats: no values");
    }
    Stats s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    if (values.size() == 1) {
        s.single = true;
        return s;
    }
    double ss = 0.0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.stddev = std::sqrt(ss / (n - 1.0));
    return s;
}

std::size_t index_at(const sim::SimTrace& trace, double t) {
    const auto it = std::lower_bound(trace.time.begin(), trace.time.end(), t - 0.5 * trace.step);
    return static_cast<std::size_t>(it - trace.time.begin());
}

double power_balance_residual(const sim::SimTrace& trace, double capacitance, double t0, double t1) {
    const std::size_t i0 = index_at(trace, t0);
    const std::size_t i1 = std::min(index_at(trace, t1), trace.size() - 1);
    if (i1 <= i0) {
        throw DegenerateInputError("power_balance_residual: empty window");
    }
    const double p_pv = mean_range(trace.p_pv, i0, i1);
    const double p_out =
        mean_range(trace.p_load, i0, i1) + mean_range(trace.p_g, i0, i1) + mean_range(trace.p_loss, i0, i1);
    const double span = trace.time[i1] - trace.time[i0];
    const double stored = 0.5 * capacitance * (trace.v_dc[i1] * trace.v_dc[i1] - trace.v_dc[i0] * trace.v_dc[i0]);
    const double scale = std::max({std::abs(p_pv), std::abs(mean_range(trace.p_load, i0, i1)), 1.0});
    return std::abs(p_pv - p_out - stored / span) / scale;
}

RunSummary summarize(const std::string& label, const sim::SimTrace& trace, const sim::ScenarioConfig& cfg,
                     const std::vector<sim::MppSegment>& oracle, double wall_seconds) {
    RunSummary s;
    s.label = label;
    s.wall_seconds = wall_seconds;
    const double fs = 1.0 / trace.step;
    const double f0 = cfg.grid.freq;
    for (std::size_t k = 0; k < 3; ++k) {
        s.grid_thd_percent = std::max(s.grid_thd_percent, thd(trace.i_g[k], f0, fs).thd_percent);
        s.load_thd_percent = std::max(s.load_thd_percent, thd(trace.i_load[k], f0, fs).thd_percent);
    }
    const auto m = mppt_metrics(trace.time, trace.p_pv, oracle);
    s.efficiency_percent = m.tracking_efficiency_percent;
    s.time_to_track = m.time_to_track;
    s.oscillation_percent = m.steady_oscillation_percent;

    // Mean |Q| over the last five cycles, one quarter-shift value per cycle.
    const std::size_t per = samples_per_cycle(f0, fs);
    double q_sum = 0.0;
    int q_count = 0;
    for (int c = 0; c < 5 && (static_cast<std::size_t>(c) + 1) * per <= trace.size(); ++c) {
        const std::size_t end = trace.size() - static_cast<std::size_t>(c) * per;
        PhaseSpans v;
        PhaseSpans i;
        for (std::size_t k = 0; k < 3; ++k) {
            v[k] = std::span<const double>(trace.v_g[k]).subspan(0, end);
            i[k] = std::span<const double>(trace.i_g[k]).subspan(0, end);
        }
        q_sum += std::abs(pq(v, i, f0, fs, 1).q);
        ++q_count;
    }
    s.mean_abs_q = q_count > 0 ? q_sum / q_count : 0.0;
    return s;
}

std::vector<ComparisonRow> compare(const std::vector<RunSummary>& runs) {
    std::vector<ComparisonRow> rows;
    for (const auto& r : runs) {
        rows.push_back({r.label, r.grid_thd_percent, r.efficiency_percent, r.time_to_track, r.wall_seconds});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
    return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    out << "label,grid_thd_percent,efficiency_percent,time_to_track_s,wall_seconds\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.label, r.thd_percent, r.efficiency_percent,
                           r.time_to_track, r.wall_seconds);
    }
}

void write_comparison_text(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    out << fmt::format("{:<12} {:>10} {:>12} {:>12} {:>10}\n", "controller", "THD %", "efficiency %", "track (s)",
                       "wall (s)");
    for (const auto& r : rows) {
        out << fmt::format("{:<12} {:>10.3f} {:>12.3f} {:>12.4f} {:>10.3f}\n", r.label, r.thd_percent,
                           r.efficiency_percent, r.time_to_track, r.wall_seconds);
    }
}

} // namespace anroa::analysis
