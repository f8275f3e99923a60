#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace anroa::opt {

/// Box limits, one (low, high) pair per decision variable.
struct Bounds {
    std::vector<std::pair<double, double>> limits;

    std::size_t size() const noexcept { return limits.size(); }
    double width(std::size_t k) const { return limits[k].second - limits[k].first; }
    /// Throws ConfigError unless low < high for every variable. Collapsed
    /// variables (low == high) are allowed when allow_fixed is set.
    void validate(bool allow_fixed = false) const;
};

using Objective = std::function<double(std::span<const double>)>;

struct Raindrop {
    std::vector<double> position;
    double radius = 0.0; // fraction of each variable's bound width
    double cost = 0.0;
};

struct RoaParams {
    std::size_t population = 20;
    double init_radius_frac = 0.25;
    double beta = 0.5;
    double min_radius_frac = 1e-6;
    std::size_t max_iters = 150;
    std::uint64_t seed = 1;

    void validate() const;
};

struct PsoParams {
    std::size_t population = 30;
    double inertia = 0.72;
    double cognitive = 1.49;
    double social = 1.49;
    double velocity_clamp_frac = 0.2;
    std::size_t max_iters = 200;
    std::uint64_t seed = 1;

    void validate() const;
};

struct OptimResult {
    std::vector<double> best;
    double cost = 0.0;
    std::vector<double> trace;             // best-so-far cost after each iteration
    std::vector<std::size_t> drop_counts;  // live population after each iteration
    std::size_t evaluations = 0;
    std::size_t rejected = 0;              // candidates whose cost was not finite
};

/// Radius of two merged drops: (r1^n + r2^n)^(1/n).
double merge_drops(double r1, double r2, std::size_t n);

/// Radius after soil absorption: (r1^n * beta)^(1/n).
double shrink_radius(double r1, double beta, std::size_t n);

/// Piecewise fitness map used for reporting only:
/// 1 / (1 + raw) for raw < 0, 1 + |raw - penalty| otherwise.
double fitness_transform(double raw, double penalty = 0.0);

/// Rain optimization. Drops seeded uniformly with randomized radii probe both
/// ends of each variable's radius interval in turn and move to any
/// improvement; overlapping drops merge, drops that did not move shrink, and
/// drops below the minimum radius are absorbed. Extra starting points in
/// `seeds` replace the first random drops.
OptimResult roa_minimize(const Objective& objective, const Bounds& bounds, const RoaParams& params,
                         const std::vector<std::vector<double>>& seeds = {});

/// Canonical global-best particle swarm with zero initial velocity.
OptimResult pso_minimize(const Objective& objective, const Bounds& bounds, const PsoParams& params,
                         const std::vector<std::vector<double>>& seeds = {});

} // namespace anroa::opt
