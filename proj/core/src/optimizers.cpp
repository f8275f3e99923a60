#include "anroa/optimizers.hpp"

#include "anroa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace anroa::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Evaluates the objective, counting calls and mapping non-finite costs to +inf.
class Evaluator {
public:
    Evaluator(const Objective& f, OptimResult& out) : f_(f), out_(out) {}

    double operator()(std::span<const double> x) {
        ++out_.evaluations;
        const double c = f_(x);
        if (!std::isfinite(c)) {
            ++out_.rejected;
            return kInf;
        }
        return c;
    }

private:
    const Objective& f_;
    OptimResult& out_;
};

std::vector<double> clamp_to(const Bounds& b, std::vector<double> x) {
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = std::clamp(x[k], b.limits[k].first, b.limits[k].second);
    }
    return x;
}

std::vector<double> uniform_point(const Bounds& b, std::mt19937_64& rng) {
    std::vector<double> x(b.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        std::uniform_real_distribution<double> u(b.limits[k].first, b.limits[k].second);
        x[k] = b.width(k) > 0.0 ? u(rng) : b.limits[k].first;
    }
    return x;
}

/// Distance in coordinates normalized by the bound widths.
double normalized_distance(const Bounds& b, const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double w = b.width(k);
        const double d = w > 0.0 ? (x[k] - y[k]) / w : 0.0;
        s += d * d;
    }
    return std::sqrt(s);
}

void check_seeds(const Bounds& b, const std::vector<std::vector<double>>& seeds) {
    for (const auto& s : seeds) {
        if (s.size() != b.size()) {
            throw ConfigError("optimizer seed point has " + std::to_string(s.size()) + " variables, bounds have " +
                              std::to_string(b.size()));
        }
    }
}

} // namespace

void Bounds::validate(bool allow_fixed) const {
    if (limits.empty()) {
        throw ConfigError("bounds: at least one variable is required");
    }
    for (std::size_t k = 0; k < limits.size(); ++k) {
        const auto [lo, hi] = limits[k];
        const bool ok = allow_fixed ? lo <= hi : lo < hi;
        if (!ok || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw ConfigError("bounds[" + std::to_string(k) + "]: requires low < high");
        }
    }
}

void RoaParams::validate() const {
    if (population < 2) {
        throw ConfigError("roa.population: must be >= 2");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw ConfigError("roa.beta: must be in (0, 1)");
    }
    if (max_iters < 1) {
        throw ConfigError("roa.max_iters: must be >= 1");
    }
    if (!(init_radius_frac > 0.0) || !(min_radius_frac > 0.0)) {
        throw ConfigError("roa: radius fractions must be positive");
    }
}

void PsoParams::validate() const {
    if (population < 1) {
        throw ConfigError("pso.population: must be >= 1");
    }
    if (max_iters < 1) {
        throw ConfigError("pso.max_iters: must be >= 1");
    }
    if (inertia < 0.0 || cognitive < 0.0 || social < 0.0 || !(velocity_clamp_frac > 0.0)) {
        throw ConfigError("pso: coefficients must be non-negative");
    }
}

double merge_drops(double r1, double r2, std::size_t n) {
    if (!(r1 > 0.0 && r2 > 0.0) || n < 1) {
        throw ConfigError("merge_drops: requires positive radii and n >= 1");
    }
    // Factor out the larger radius so r^n cannot overflow or underflow.
    const double big = std::max(r1, r2);
    const double ratio = std::min(r1, r2) / big;
    const double nd = static_cast<double>(n);
    return big * std::pow(1.0 + std::pow(ratio, nd), 1.0 / nd);
}

double shrink_radius(double r1, double beta, std::size_t n) {
    if (!(r1 > 0.0) || !(beta > 0.0 && beta < 1.0) || n < 1) {
        throw ConfigError("shrink_radius: requires r1 > 0, 0 < beta < 1, n >= 1");
    }
    return r1 * std::pow(beta, 1.0 / static_cast<double>(n));
}

double fitness_transform(double raw, double penalty) {
    if (raw < 0.0) {
        return 1.0 / (1.0 + raw);
    }
    return 1.0 + std::abs(raw - penalty);
}

OptimResult roa_minimize(const Objective& objective, const Bounds& bounds, const RoaParams& params,
                         const std::vector<std::vector<double>>& seeds) {
    bounds.validate(true);
    params.validate();
    check_seeds(bounds, seeds);
    const std::size_t n = bounds.size();

    OptimResult result;
    Evaluator eval(objective, result);
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> radius_draw(0.5 * params.init_radius_frac, params.init_radius_frac);

    std::vector<Raindrop> drops(params.population);
    for (std::size_t k = 0; k < drops.size(); ++k) {
        auto& d = drops[k];
        d.position = k < seeds.size() ? clamp_to(bounds, seeds[k]) : uniform_point(bounds, rng);
        d.radius = radius_draw(rng);
        d.cost = eval(d.position);
    }
    result.best = drops.front().position;
    result.cost = drops.front().cost;
    auto note_best = [&](const Raindrop& d) {
        if (d.cost < result.cost) {
            result.cost = d.cost;
            result.best = d.position;
        }
    };
    for (const auto& d : drops) {
        note_best(d);
    }

    std::vector<char> moved;
    for (std::size_t iter = 0; iter < params.max_iters && !drops.empty(); ++iter) {
        moved.assign(drops.size(), 0);
        // Neighbourhood sweep: both endpoints of variable 1, then variable 2, ...
        for (std::size_t i = 0; i < drops.size(); ++i) {
            auto& d = drops[i];
            for (std::size_t k = 0; k < n; ++k) {
                const double step = d.radius * bounds.width(k);
                if (step <= 0.0) {
                    continue;
                }
                for (double sign : {-1.0, 1.0}) {
                    auto probe = d.position;
                    probe[k] = std::clamp(probe[k] + sign * step, bounds.limits[k].first, bounds.limits[k].second);
                    const double c = eval(probe);
                    if (c < d.cost) {
                        d.position = std::move(probe);
                        d.cost = c;
                        moved[i] = 1;
                    }
                }
            }
            note_best(d);
        }

        // Merge drops whose neighbourhoods overlap; the better position survives.
        for (std::size_t i = 0; i < drops.size(); ++i) {
            for (std::size_t j = i + 1; j < drops.size();) {
                if (normalized_distance(bounds, drops[i].position, drops[j].position) <
                    drops[i].radius + drops[j].radius) {
                    const double r = merge_drops(drops[i].radius, drops[j].radius, n);
                    if (drops[j].cost < drops[i].cost) {
                        drops[i].position = drops[j].position;
                        drops[i].cost = drops[j].cost;
                    }
                    drops[i].radius = r;
                    moved[i] = 1;
                    drops.erase(drops.begin() + static_cast<std::ptrdiff_t>(j));
                    moved.erase(moved.begin() + static_cast<std::ptrdiff_t>(j));
                } else {
                    ++j;
                }
            }
        }

        // Soil absorption for drops that did not move; tiny drops are absorbed.
        for (std::size_t i = 0; i < drops.size(); ++i) {
            if (!moved[i]) {
                drops[i].radius = shrink_radius(drops[i].radius, params.beta, n);
            }
        }
        std::erase_if(drops, [&](const Raindrop& d) { return d.radius < params.min_radius_frac; });

        result.trace.push_back(result.cost);
        result.drop_counts.push_back(drops.size());
    }
    return result;
}

OptimResult pso_minimize(const Objective& objective, const Bounds& bounds, const PsoParams& params,
                         const std::vector<std::vector<double>>& seeds) {
    bounds.validate(true);
    params.validate();
    check_seeds(bounds, seeds);
    const std::size_t n = bounds.size();

    OptimResult result;
    Evaluator eval(objective, result);
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Particle {
        std::vector<double> x, v, best;
        double cost = kInf;
        double best_cost = kInf;
    };
    std::vector<Particle> swarm(params.population);
    for (std::size_t k = 0; k < swarm.size(); ++k) {
        auto& p = swarm[k];
        p.x = k < seeds.size() ? clamp_to(bounds, seeds[k]) : uniform_point(bounds, rng);
        p.v.assign(n, 0.0);
        p.cost = eval(p.x);
        p.best = p.x;
        p.best_cost = p.cost;
    }
    const auto first = std::min_element(swarm.begin(), swarm.end(),
                                        [](const Particle& a, const Particle& b) { return a.best_cost < b.best_cost; });
    result.best = first->best;
    result.cost = first->best_cost;

    for (std::size_t iter = 0; iter < params.max_iters; ++iter) {
        for (auto& p : swarm) {
            for (std::size_t k = 0; k < n; ++k) {
                const double vmax = params.velocity_clamp_frac * bounds.width(k);
                const double r1 = unit(rng);
                const double r2 = unit(rng);
                double v = params.inertia * p.v[k] + params.cognitive * r1 * (p.best[k] - p.x[k]) +
                           params.social * r2 * (result.best[k] - p.x[k]);
                v = std::clamp(v, -vmax, vmax);
                p.v[k] = v;
                p.x[k] = std::clamp(p.x[k] + v, bounds.limits[k].first, bounds.limits[k].second);
            }
            p.cost = eval(p.x);
            if (p.cost < p.best_cost) {
                p.best_cost = p.cost;
                p.best = p.x;
            }
            if (p.best_cost < result.cost) {
                result.cost = p.best_cost;
                result.best = p.best;
            }
        }
        result.trace.push_back(result.cost);
        result.drop_counts.push_back(swarm.size());
    }
    return result;
}

} // namespace anroa::opt
