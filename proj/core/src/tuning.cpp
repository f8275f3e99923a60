#include "anroa/tuning.hpp"

#include "anroa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace anroa::tune {

double episode_cost(const sim::SimTrace& trace, double dc_weight) {
    double current = 0.0;
    double voltage = 0.0;
    for (std::size_t n = 1; n < trace.size(); ++n) {
        for (std::size_t k = 0; k < 3; ++k) {
            current += std::abs(trace.i_gref[k][n] - trace.i_g[k][n]);
        }
        voltage += std::abs(trace.v_dcref[n] - trace.v_dc[n]);
    }
    return trace.step * (current + dc_weight * voltage);
}

sim::ScenarioConfig with_gains(sim::ScenarioConfig cfg, const Gains& g) {
    cfg.vsc.kp = g.kp;
    cfg.vsc.ki = g.ki;
    cfg.vsc.band = g.band;
    return cfg;
}

double evaluate_gains(const sim::ScenarioConfig& cfg, const anfis::AnfisNet* net, const Gains& g) {
    auto episode = with_gains(cfg, g);
    episode.duration = cfg.tuning.episode;
    episode.schedule.clear();
    const auto trace = sim::run_scenario(episode, net);
    if (trace.faulted) {
        return std::numeric_limits<double>::infinity();
    }
    return episode_cost(trace, cfg.tuning.dc_weight);
}

TuneResult tune_gains(const sim::ScenarioConfig& cfg, const anfis::AnfisNet* net, sim::TuneOptimizer which,
                      std::uint64_t seed) {
    cfg.validate();
    anfis::AnfisNet local;
    if (cfg.mppt.variant == sim::MpptVariant::anfis && net == nullptr) {
        local = sim::prepare_anfis(cfg);
        net = &local;
    }
    TuneResult r;
    r.defaults = {cfg.vsc.kp, cfg.vsc.ki, cfg.vsc.band};
    r.default_cost = evaluate_gains(cfg, net, r.defaults);
    r.gains = r.defaults;
    r.cost = r.default_cost;
    if (which == sim::TuneOptimizer::none) {
        return r;
    }

    opt::Bounds bounds;
    for (const auto& b : cfg.tuning.bounds) {
        bounds.limits.push_back(b);
    }
    const std::vector<double> start{std::clamp(r.defaults.kp, bounds.limits[0].first, bounds.limits[0].second),
                                    std::clamp(r.defaults.ki, bounds.limits[1].first, bounds.limits[1].second),
                                    std::clamp(r.defaults.band, bounds.limits[2].first, bounds.limits[2].second)};
    const opt::Objective objective = [&](std::span<const double> x) {
        return evaluate_gains(cfg, net, {x[0], x[1], x[2]});
    };
    if (which == sim::TuneOptimizer::roa) {
        opt::RoaParams p;
        p.population = cfg.tuning.population;
        p.max_iters = cfg.tuning.iterations;
        p.seed = seed;
        r.search = opt::roa_minimize(objective, bounds, p, {start});
    } else {
        opt::PsoParams p;
        p.population = cfg.tuning.population;
        p.max_iters = cfg.tuning.iterations;
        p.seed = seed;
        r.search = opt::pso_minimize(objective, bounds, p, {start});
    }
    if (r.search.cost < r.default_cost) {
        r.gains = {r.search.best[0], r.search.best[1], r.search.best[2]};
        r.cost = r.search.cost;
    }
    return r;
}

} // namespace anroa::tune
