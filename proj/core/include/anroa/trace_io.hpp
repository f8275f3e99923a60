#pragma once

#include "anroa/analysis.hpp"
#include "anroa/anfis.hpp"
#include "anroa/plant_sim.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace anroa::io {

/// Header row then one row per sample, columns in SimTrace::column_names()
/// order, values printed with 17 significant digits so they read back exactly.
void write_trace_csv(std::ostream& out, const sim::SimTrace& trace);

/// Inverse of write_trace_csv. The step is taken from the first two time
/// stamps. Throws ConfigError on a wrong header or a malformed row.
sim::SimTrace read_trace_csv(std::istream& in);

/// Harmonic amplitudes (orders 0..50) of the grid and load currents per phase.
void write_thd_csv(std::ostream& out, const sim::SimTrace& trace, double f0);

/// Plain-text run summary. A faulted run says so and reports no metrics.
void write_summary(std::ostream& out, const std::string& scenario, const sim::SimTrace& trace,
                   const analysis::RunSummary* summary, const std::vector<std::string>& notes = {});

struct Series {
    std::string label;
    const std::vector<double>* values = nullptr;
};

/// Standalone SVG line chart of one or more series against x.
void write_svg_lines(std::ostream& out, const std::string& title, const std::vector<double>& x,
                     const std::vector<Series>& series, const std::string& x_label = "time (s)");

/// Standalone SVG bar chart of harmonic amplitudes (order 1 upwards).
void write_svg_spectrum(std::ostream& out, const std::string& title, const analysis::HarmonicReport& report);

} // namespace anroa::io

namespace anroa::io {

/// ANFIS training samples as `x,y,target` rows under a header.
void write_dataset_csv(std::ostream& out, const anfis::TrainingSet& data);

/// Throws ConfigError on a wrong header, a malformed row or an empty set.
anfis::TrainingSet read_dataset_csv(std::istream& in);

/// `epoch,rmse` rows; epoch 0 is the untrained network.
void write_rmse_csv(std::ostream& out, const anfis::TrainResult& result);

} // namespace anroa::io
