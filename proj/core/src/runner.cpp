#include "anroa/runner.hpp"

#include "anroa/errors.hpp"

#include <chrono>

namespace anroa::run {

Variant parse_variant(const std::string& name) {
    if (name == "proposed") {
        return Variant::proposed;
    }
    if (name == "po") {
        return Variant::po;
    }
    if (name == "pso-tuned") {
        return Variant::pso_tuned;
    }
    throw ConfigError("variant: must be one of proposed, po, pso-tuned (got '" + name + "')");
}

std::string variant_name(Variant v) {
    switch (v) {
    case Variant::proposed:
        return "proposed";
    case Variant::po:
        return "po";
    case Variant::pso_tuned:
        return "pso-tuned";
    }
    return "?";
}

sim::ScenarioConfig apply_variant(sim::ScenarioConfig cfg, Variant v) {
    switch (v) {
    case Variant::proposed:
        cfg.mppt.variant = sim::MpptVariant::anfis;
        if (cfg.tuning.optimizer != sim::TuneOptimizer::none) {
            cfg.tuning.optimizer = sim::TuneOptimizer::roa;
        }
        break;
    case Variant::po:
        cfg.mppt.variant = sim::MpptVariant::po;
        cfg.tuning.optimizer = sim::TuneOptimizer::none;
        break;
    case Variant::pso_tuned:
        cfg.mppt.variant = sim::MpptVariant::anfis;
        cfg.tuning.optimizer = sim::TuneOptimizer::pso;
        break;
    }
    return cfg;
}

Outcome run_variant(const sim::ScenarioConfig& base, Variant v, const anfis::AnfisNet* net) {
    Outcome out;
    out.config = apply_variant(base, v);
    out.config.validate();
    anfis::AnfisNet local;
    if (out.config.mppt.variant == sim::MpptVariant::anfis && net == nullptr) {
        local = sim::prepare_anfis(out.config);
        net = &local;
    }
    if (out.config.tuning.optimizer != sim::TuneOptimizer::none) {
        out.tuning = tune::tune_gains(out.config, net, out.config.tuning.optimizer, out.config.seed);
        out.config = tune::with_gains(out.config, out.tuning->gains);
    }
    const auto t0 = std::chrono::steady_clock::now();
    out.trace = sim::run_scenario(out.config, net);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.trace.faulted) {
        out.summary = analysis::summarize(variant_name(v), out.trace, out.config, sim::mpp_schedule(out.config),
                                          out.wall_seconds);
    }
    return out;
}

} // namespace anroa::run
