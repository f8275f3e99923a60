#include "anroa/trace_io.hpp"

#include "anroa/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace anroa::io {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

double to_double(std::string_view s, std::size_t row, std::string_view what = "trace csv") {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError(fmt::format("{}: row {}: '{}' is not a number", what, row, s));
    }
    return v;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

} // namespace

void write_trace_csv(std::ostream& out, const sim::SimTrace& trace) {
    const auto names = trace.column_names();
    const auto cols = trace.columns();
    for (std::size_t c = 0; c < names.size(); ++c) {
        out << (c ? "," : "") << names[c];
    }
    out << '\n';
    fmt::memory_buffer buf;
    for (std::size_t n = 0; n < trace.size(); ++n) {
        buf.clear();
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) {
                buf.push_back(',');
            }
            fmt::format_to(std::back_inserter(buf), "{:.17g}", (*cols[c])[n]);
        }
        buf.push_back('\n');
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

sim::SimTrace read_trace_csv(std::istream& in) {
    sim::SimTrace trace;
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("trace csv: empty input");
    }
    const auto names = trace.column_names();
    const auto header = split(line);
    if (header.size() != names.size() || !std::equal(header.begin(), header.end(), names.begin())) {
        throw ConfigError("trace csv: header does not match the trace column order");
    }
    auto cols = trace.columns();
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != cols.size()) {
            throw ConfigError(fmt::format("trace csv: row {} has {} fields, expected {}", row, cells.size(),
                                          cols.size()));
        }
        for (std::size_t c = 0; c < cols.size(); ++c) {
            cols[c]->push_back(to_double(cells[c], row));
        }
    }
    if (trace.size() >= 2) {
        trace.step = trace.time[1] - trace.time[0];
    }
    return trace;
}

void write_thd_csv(std::ostream& out, const sim::SimTrace& trace, double f0) {
    const double fs = 1.0 / trace.step;
    out << "channel,order,amplitude,percent_of_fundamental\n";
    const char* phases = "abc";
    auto emit = [&](const std::string& channel, const std::vector<double>& x) {
        const auto r = analysis::thd(x, f0, fs);
        for (std::size_t h = 0; h < r.amplitudes.size(); ++h) {
            out << fmt::format("{},{},{:.17g},{:.17g}\n", channel, h, r.amplitudes[h],
                               100.0 * r.amplitudes[h] / r.fundamental);
        }
        out << fmt::format("{},thd,,{:.17g}\n", channel, r.thd_percent);
    };
    for (std::size_t k = 0; k < 3; ++k) {
        emit(fmt::format("i_g_{}", phases[k]), trace.i_g[k]);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        emit(fmt::format("i_load_{}", phases[k]), trace.i_load[k]);
    }
}

void write_summary(std::ostream& out, const std::string& scenario, const sim::SimTrace& trace,
                   const analysis::RunSummary* s, const std::vector<std::string>& notes) {
    out << fmt::format("scenario: {}\n", scenario);
    out << fmt::format("samples: {}\n", trace.size());
    if (trace.faulted) {
        out << fmt::format("status: FAULT at t = {:.6f} s\n", trace.fault_time);
        out << fmt::format("fault: {}\n", trace.fault_message);
    } else {
        out << "status: ok\n";
    }
    if (s != nullptr && !trace.faulted) {
        out << fmt::format("controller: {}\n", s->label);
        out << fmt::format("grid_current_thd_percent: {:.4f}\n", s->grid_thd_percent);
        out << fmt::format("load_current_thd_percent: {:.4f}\n", s->load_thd_percent);
        out << fmt::format("mean_abs_q_var: {:.2f}\n", s->mean_abs_q);
        out << fmt::format("tracking_efficiency_percent: {:.4f}\n", s->efficiency_percent);
        out << fmt::format("time_to_track_s: {:.4f}\n", s->time_to_track);
        out << fmt::format("steady_oscillation_percent: {:.4f}\n", s->oscillation_percent);
        out << fmt::format("wall_seconds: {:.3f}\n", s->wall_seconds);
    }
    for (const auto& n : notes) {
        out << n << '\n';
    }
}

void write_svg_lines(std::ostream& out, const std::string& title, const std::vector<double>& x,
                     const std::vector<Series>& series, const std::string& x_label) {
    constexpr double w = 900.0;
    constexpr double h = 360.0;
    constexpr double left = 70.0;
    constexpr double right = 20.0;
    constexpr double top = 40.0;
    constexpr double bottom = 50.0;
    constexpr std::size_t max_points = 4000;

    double x0 = x.empty() ? 0.0 : x.front();
    double x1 = x.empty() ? 1.0 : x.back();
    double y0 = 0.0;
    double y1 = 0.0;
    bool first = true;
    for (const auto& s : series) {
        for (double v : *s.values) {
            y0 = first ? v : std::min(y0, v);
            y1 = first ? v : std::max(y1, v);
            first = false;
        }
    }
    if (x1 <= x0) {
        x1 = x0 + 1.0;
    }
    if (y1 <= y0) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * (w - left - right); };
    auto py = [&](double v) { return top + (y1 - v) / (y1 - y0) * (h - top - bottom); };

    out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)",
                       w, h)
        << '\n';
    out << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", w, h) << '\n';
    out << fmt::format(R"(<text x="{}" y="22" font-size="15">{}</text>)", left, title) << '\n';
    out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>)", left, top,
                       w - left - right, h - top - bottom)
        << '\n';
    for (int k = 0; k <= 4; ++k) {
        const double yv = y0 + (y1 - y0) * k / 4.0;
        const double xv = x0 + (x1 - x0) * k / 4.0;
        out << fmt::format(R"(<text x="{}" y="{}" text-anchor="end">{:.4g}</text>)", left - 6, py(yv) + 4, yv) << '\n';
        out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{:.4g}</text>)", px(xv), h - bottom + 18, xv)
            << '\n';
    }
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)", (left + w - right) / 2, h - 10, x_label)
        << '\n';
    const std::size_t stride = std::max<std::size_t>(1, x.size() / max_points);
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& v = *series[s].values;
        const auto color = kPalette[s % std::size(kPalette)];
        out << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1" points=")", color);
        for (std::size_t n = 0; n < std::min(x.size(), v.size()); n += stride) {
            out << fmt::format("{:.1f},{:.1f} ", px(x[n]), py(v[n]));
        }
        out << "\"/>\n";
        out << fmt::format(R"(<text x="{}" y="{}" fill="{}">{}</text>)", w - right - 140, top + 16 + 14 * s, color,
                           series[s].label)
            << '\n';
    }
    out << "</svg>\n";
}

void write_svg_spectrum(std::ostream& out, const std::string& title, const analysis::HarmonicReport& report) {
    std::vector<double> orders;
    std::vector<double> percent;
    for (std::size_t hn = 1; hn < report.amplitudes.size(); ++hn) {
        orders.push_back(static_cast<double>(hn));
        percent.push_back(100.0 * report.amplitudes[hn] / report.fundamental);
    }
    constexpr double w = 900.0;
    constexpr double h = 360.0;
    constexpr double left = 70.0;
    constexpr double top = 40.0;
    constexpr double bottom = 50.0;
    const double plot_w = w - left - 20.0;
    const double plot_h = h - top - bottom;
    // Bars are drawn against the largest harmonic so the distortion stays visible.
    double peak = 0.0;
    for (std::size_t k = 1; k < percent.size(); ++k) {
        peak = std::max(peak, percent[k]);
    }
    peak = peak > 0.0 ? peak * 1.1 : 1.0;
    const double bw = plot_w / static_cast<double>(std::max<std::size_t>(percent.size(), 1));
    out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)",
                       w, h)
        << '\n';
    out << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", w, h) << '\n';
    out << fmt::format(R"(<text x="{}" y="22" font-size="15">{} (THD {:.2f}%, fundamental {:.2f} A)</text>)", left,
                       title, report.thd_percent, report.fundamental)
        << '\n';
    for (std::size_t k = 1; k < percent.size(); ++k) {
        const double bh = std::min(percent[k] / peak, 1.0) * plot_h;
        out << fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="#1f77b4"/>)",
                           left + bw * k + 1, top + plot_h - bh, std::max(bw - 2, 1.0), bh)
            << '\n';
    }
    for (int k = 0; k <= 4; ++k) {
        const double v = peak * k / 4.0;
        out << fmt::format(R"(<text x="{}" y="{:.1f}" text-anchor="end">{:.3g}%</text>)", left - 6,
                           top + plot_h - plot_h * k / 4.0 + 4, v)
            << '\n';
    }
    for (std::size_t k = 0; k < orders.size(); k += 5) {
        out << fmt::format(R"(<text x="{:.1f}" y="{}" text-anchor="middle">{}</text>)", left + bw * (k + 0.5),
                           h - bottom + 18, static_cast<int>(orders[k]))
            << '\n';
    }
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">harmonic order (fundamental omitted)</text>)",
                       left + plot_w / 2, h - 10)
        << '\n';
    out << "</svg>\n";
}

void write_dataset_csv(std::ostream& out, const anfis::TrainingSet& data) {
    out << "x,y,target\n";
    for (const auto& s : data) {
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", s.x, s.y, s.target);
    }
}

anfis::TrainingSet read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "x,y,target") {
        throw ConfigError("dataset csv: expected header x,y,target");
    }
    anfis::TrainingSet data;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != 3) {
            throw ConfigError(fmt::format("dataset csv: row {} has {} fields, expected 3", row, cells.size()));
        }
        data.push_back({to_double(cells[0], row, "dataset csv"), to_double(cells[1], row, "dataset csv"),
                        to_double(cells[2], row, "dataset csv")});
    }
    if (data.empty()) {
        throw ConfigError("dataset csv: no samples");
    }
    return data;
}

void write_rmse_csv(std::ostream& out, const anfis::TrainResult& result) {
    out << "epoch,rmse\n";
    out << fmt::format("0,{:.17g}\n", result.initial_rmse);
    for (std::size_t k = 0; k < result.rmse.size(); ++k) {
        out << fmt::format("{},{:.17g}\n", k + 1, result.rmse[k]);
    }
}

} // namespace anroa::io
