#pragma once

#include "anroa/analysis.hpp"
#include "anroa/plant_sim.hpp"
#include "anroa/tuning.hpp"

#include <optional>
#include <string>

namespace anroa::run {

/// Controller line-ups compared by the tool.
///   proposed:  ANFIS MPPT, VSC gains tuned by ROA (unless the scenario sets
///              tuning.optimizer to none)
///   po:        perturb-and-observe MPPT, configured VSC gains
///   pso_tuned: ANFIS MPPT, VSC gains tuned by PSO
enum class Variant { proposed, po, pso_tuned };

/// Accepts "proposed", "po" and "pso-tuned". Throws ConfigError otherwise.
Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);

/// Scenario with the variant's MPPT and tuning choice applied.
sim::ScenarioConfig apply_variant(sim::ScenarioConfig cfg, Variant v);

struct Outcome {
    sim::ScenarioConfig config; // as run, tuned gains included
    sim::SimTrace trace;
    std::optional<tune::TuneResult> tuning;
    std::optional<analysis::RunSummary> summary; // empty after a fault
    double wall_seconds = 0.0;                   // tuning excluded
};

/// Prepares the network (unless given), tunes, runs and summarizes.
Outcome run_variant(const sim::ScenarioConfig& cfg, Variant v, const anfis::AnfisNet* net = nullptr);

} // namespace anroa::run
