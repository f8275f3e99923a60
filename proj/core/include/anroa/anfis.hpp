#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace anroa::anfis {

/// Two-parameter bell: mu(x) = 1 / (1 + ((x - d) / a)^2).
struct BellMf {
    double a = 1.0;
    double d = 0.0;
};

/// Linear rule consequent f = p x + q y + r.
struct Consequent {
    double p = 0.0;
    double q = 0.0;
    double r = 0.0;
};

/// Two-input first-order Sugeno network with a full grid of rules.
///
/// Rule j pairs mfs_x[j / mfs_y.size()] with mfs_y[j % mfs_y.size()], so the
/// rule count is always |mfs_x| * |mfs_y| and consequents has one entry per rule.
struct AnfisNet {
    std::vector<BellMf> mfs_x;
    std::vector<BellMf> mfs_y;
    std::vector<Consequent> consequents;
    bool trained = false;

    std::size_t rule_count() const noexcept { return mfs_x.size() * mfs_y.size(); }
    std::size_t rule_x(std::size_t j) const noexcept { return j / mfs_y.size(); }
    std::size_t rule_y(std::size_t j) const noexcept { return j % mfs_y.size(); }

    /// Throws ConfigError on empty MF lists, non-positive widths or a
    /// consequent count that does not match the rule count.
    void validate() const;
};

struct Sample {
    double x = 0.0;
    double y = 0.0;
    double target = 0.0;
};

using TrainingSet = std::vector<Sample>;

double membership(const BellMf& mf, double x);

/// Product T-norm firing strength of every rule.
std::vector<double> firing_strengths(const AnfisNet& net, double x, double y);

/// Strengths divided by their sum. Throws DegenerateInputError when all are zero.
std::vector<double> normalize(std::span<const double> strengths);

double forward(const AnfisNet& net, double x, double y);

/// Partial derivatives of the network output with respect to every parameter.
struct Gradient {
    std::vector<BellMf> mfs_x; // (d f / d a, d f / d d) per MF
    std::vector<BellMf> mfs_y;
    std::vector<Consequent> consequents;
};

Gradient gradient(const AnfisNet& net, double x, double y);

/// Worst relative disagreement between gradient() and central differences.
double gradient_check(const AnfisNet& net, double x, double y);

/// Centers on an even grid over the data range of each input, widths half the
/// grid spacing, consequents zero.
AnfisNet initialize(const TrainingSet& data, std::size_t mfs_per_input = 3);

struct EpochRecord {
    double rmse_before_lse = 0.0;
    double rmse_after_lse = 0.0;
    double rmse = 0.0; // end of epoch, after the premise step
    double learning_rate = 0.0;
    bool rank_deficient = false;
};

struct TrainResult {
    AnfisNet net;
    double initial_rmse = 0.0;   // untrained network on the data
    std::vector<double> rmse;    // one entry per epoch, end-of-epoch value
    std::vector<EpochRecord> epochs;
};

/// Hybrid learning: per epoch, least squares on the consequents with premises
/// frozen, then one batch gradient step on the bell parameters. A premise step
/// that would raise the error is rejected and the learning rate halved.
TrainResult hybrid_train(AnfisNet net, const TrainingSet& data, int epochs = 50, double learning_rate = 0.01);

double rmse(const AnfisNet& net, const TrainingSet& data);

/// Plain-text parameter file; see README for the field order.
void save(const AnfisNet& net, std::ostream& out);
AnfisNet load(std::istream& in);

} // namespace anroa::anfis
