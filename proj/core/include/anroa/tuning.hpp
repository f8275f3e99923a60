#pragma once

#include "anroa/optimizers.hpp"
#include "anroa/plant_sim.hpp"

#include <array>
#include <cstdint>

namespace anroa::tune {

/// Gains searched by the tuner.
struct Gains {
    double kp = 0.0;
    double ki = 0.0;
    double band = 0.0;
};

/// Episode cost: integral of sum |i_gref - i_g| plus dc_weight times the
/// integral of |v_dcref - v_dc|, rectangle rule at the trace step.
double episode_cost(const sim::SimTrace& trace, double dc_weight);

/// Cost of running cfg's episode with the given gains. A faulted run is +inf.
double evaluate_gains(const sim::ScenarioConfig& cfg, const anfis::AnfisNet* net, const Gains& g);

struct TuneResult {
    Gains gains;
    double cost = 0.0;
    Gains defaults;
    double default_cost = 0.0;
    opt::OptimResult search;
};

/// Searches (kp, ki, band) inside cfg.tuning.bounds with the chosen optimizer,
/// seeded with the configured gains (clamped into the bounds). The result never
/// costs more than the configured gains. Deterministic for a fixed seed.
TuneResult tune_gains(const sim::ScenarioConfig& cfg, const anfis::AnfisNet* net, sim::TuneOptimizer which,
                      std::uint64_t seed);

inline TuneResult roa_tune(const sim::ScenarioConfig& cfg, const anfis::AnfisNet* net, std::uint64_t seed) {
    return tune_gains(cfg, net, sim::TuneOptimizer::roa, seed);
}

inline TuneResult pso_tune(const sim::ScenarioConfig& cfg, const anfis::AnfisNet* net, std::uint64_t seed) {
    return tune_gains(cfg, net, sim::TuneOptimizer::pso, seed);
}

/// Copy of cfg running with the given VSC gains.
sim::ScenarioConfig with_gains(sim::ScenarioConfig cfg, const Gains& g);

} // namespace anroa::tune
