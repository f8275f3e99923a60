#include "anroa/anfis.hpp"

#include "anroa/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace anroa::anfis {

namespace {

/// d mu / d a and d mu / d d for one bell.
BellMf membership_partials(const BellMf& mf, double x) {
    const double u = (x - mf.d) / mf.a;
    const double mu = 1.0 / (1.0 + u * u);
    const double mu2 = mu * mu;
    return {2.0 * u * u * mu2 / mf.a, 2.0 * u * mu2 / mf.a};
}

Eigen::MatrixXd design_matrix(const AnfisNet& net, const TrainingSet& data) {
    const auto rules = static_cast<Eigen::Index>(net.rule_count());
    Eigen::MatrixXd a(static_cast<Eigen::Index>(data.size()), 3 * rules);
    for (std::size_t s = 0; s < data.size(); ++s) {
        const auto w = normalize(firing_strengths(net, data[s].x, data[s].y));
        for (Eigen::Index j = 0; j < rules; ++j) {
            const double wj = w[static_cast<std::size_t>(j)];
            const auto row = static_cast<Eigen::Index>(s);
            a(row, 3 * j) = wj * data[s].x;
            a(row, 3 * j + 1) = wj * data[s].y;
            a(row, 3 * j + 2) = wj;
        }
    }
    return a;
}

void expect_token(std::istream& in, const std::string& token) {
    std::string got;
    if (!(in >> got) || got != token) {
        throw ConfigError("anfis parameter file: expected '" + token + "', got '" + got + "'");
    }
}

std::vector<BellMf> read_mfs(std::istream& in, const std::string& key) {
    expect_token(in, key);
    std::size_t n = 0;
    if (!(in >> n) || n == 0) {
        throw ConfigError("anfis parameter file: bad count after '" + key + "'");
    }
    std::vector<BellMf> mfs(n);
    for (auto& mf : mfs) {
        if (!(in >> mf.a >> mf.d)) {
            throw ConfigError("anfis parameter file: truncated '" + key + "' block");
        }
    }
    return mfs;
}

} // namespace

void AnfisNet::validate() const {
    if (mfs_x.empty() || mfs_y.empty()) {
        throw ConfigError("anfis: each input needs at least one membership function");
    }
    auto positive = [](const BellMf& mf) { return mf.a > 0.0 && std::isfinite(mf.a) && std::isfinite(mf.d); };
    if (!std::all_of(mfs_x.begin(), mfs_x.end(), positive) || !std::all_of(mfs_y.begin(), mfs_y.end(), positive)) {
        throw ConfigError("anfis: membership widths must be positive and finite");
    }
    if (consequents.size() != rule_count()) {
        throw ConfigError("anfis: consequent count " + std::to_string(consequents.size()) +
                          " does not match rule count " + std::to_string(rule_count()));
    }
}

double membership(const BellMf& mf, double x) {
    const double u = (x - mf.d) / mf.a;
    return 1.0 / (1.0 + u * u);
}

std::vector<double> firing_strengths(const AnfisNet& net, double x, double y) {
    std::vector<double> w(net.rule_count());
    for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = membership(net.mfs_x[net.rule_x(j)], x) * membership(net.mfs_y[net.rule_y(j)], y);
    }
    return w;
}

std::vector<double> normalize(std::span<const double> strengths) {
    const double total = std::accumulate(strengths.begin(), strengths.end(), 0.0);
    if (!(total > 0.0)) {
        throw DegenerateInputError("anfis normalize: all firing strengths are zero");
    }
    std::vector<double> out(strengths.size());
    std::transform(strengths.begin(), strengths.end(), out.begin(), [total](double w) { return w / total; });
    return out;
}

double forward(const AnfisNet& net, double x, double y) {
    const auto w = normalize(firing_strengths(net, x, y));
    double f = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const auto& c = net.consequents[j];
        f += w[j] * (c.p * x + c.q * y + c.r);
    }
    return f;
}

Gradient gradient(const AnfisNet& net, double x, double y) {
    const auto w = firing_strengths(net, x, y);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0.0)) {
        throw DegenerateInputError("anfis gradient: all firing strengths are zero");
    }
    std::vector<double> fj(w.size());
    double f = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const auto& c = net.consequents[j];
        fj[j] = c.p * x + c.q * y + c.r;
        f += w[j] / total * fj[j];
    }

    Gradient g;
    g.mfs_x.assign(net.mfs_x.size(), BellMf{0.0, 0.0});
    g.mfs_y.assign(net.mfs_y.size(), BellMf{0.0, 0.0});
    g.consequents.resize(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double wn = w[j] / total;
        g.consequents[j] = {wn * x, wn * y, wn};
        // d f / d W_j, then chain through the product T-norm.
        const double df_dw = (fj[j] - f) / total;
        const std::size_t ix = net.rule_x(j);
        const std::size_t iy = net.rule_y(j);
        const double mux = membership(net.mfs_x[ix], x);
        const double muy = membership(net.mfs_y[iy], y);
        const auto px = membership_partials(net.mfs_x[ix], x);
        const auto py = membership_partials(net.mfs_y[iy], y);
        g.mfs_x[ix].a += df_dw * muy * px.a;
        g.mfs_x[ix].d += df_dw * muy * px.d;
        g.mfs_y[iy].a += df_dw * mux * py.a;
        g.mfs_y[iy].d += df_dw * mux * py.d;
    }
    return g;
}

double gradient_check(const AnfisNet& net, double x, double y) {
    const Gradient analytic = gradient(net, x, y);
    AnfisNet work = net;
    double worst = 0.0;
    auto probe = [&](double& param, double exact) {
        const double saved = param;
        const double h = 1e-6 * std::max(1.0, std::abs(saved));
        param = saved + h;
        const double up = forward(work, x, y);
        param = saved - h;
        const double down = forward(work, x, y);
        param = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(exact), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(exact - numeric) / scale);
    };
    for (std::size_t k = 0; k < work.mfs_x.size(); ++k) {
        probe(work.mfs_x[k].a, analytic.mfs_x[k].a);
        probe(work.mfs_x[k].d, analytic.mfs_x[k].d);
    }
    for (std::size_t k = 0; k < work.mfs_y.size(); ++k) {
        probe(work.mfs_y[k].a, analytic.mfs_y[k].a);
        probe(work.mfs_y[k].d, analytic.mfs_y[k].d);
    }
    for (std::size_t j = 0; j < work.consequents.size(); ++j) {
        probe(work.consequents[j].p, analytic.consequents[j].p);
        probe(work.consequents[j].q, analytic.consequents[j].q);
        probe(work.consequents[j].r, analytic.consequents[j].r);
    }
    return worst;
}

AnfisNet initialize(const TrainingSet& data, std::size_t mfs_per_input) {
    if (data.empty()) {
        throw ConfigError("anfis: training set is empty");
    }
    if (mfs_per_input == 0) {
        throw ConfigError("anfis: mfs_per_input must be >= 1");
    }
    auto grid = [&](auto member) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& s : data) {
            lo = std::min(lo, s.*member);
            hi = std::max(hi, s.*member);
        }
        if (!(hi > lo)) {
            hi = lo + 1.0;
        }
        std::vector<BellMf> mfs(mfs_per_input);
        const double spacing = mfs_per_input > 1 ? (hi - lo) / static_cast<double>(mfs_per_input - 1) : (hi - lo);
        for (std::size_t k = 0; k < mfs_per_input; ++k) {
            const double center = mfs_per_input > 1 ? lo + spacing * static_cast<double>(k) : 0.5 * (lo + hi);
            mfs[k] = {0.5 * spacing, center};
        }
        return mfs;
    };
    AnfisNet net;
    net.mfs_x = grid(&Sample::x);
    net.mfs_y = grid(&Sample::y);
    net.consequents.assign(net.rule_count(), Consequent{});
    return net;
}

double rmse(const AnfisNet& net, const TrainingSet& data) {
    double sum = 0.0;
    for (const auto& s : data) {
        const double e = forward(net, s.x, s.y) - s.target;
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(data.size()));
}

TrainResult hybrid_train(AnfisNet net, const TrainingSet& data, int epochs, double learning_rate) {
    if (epochs < 1) {
        throw ConfigError("anfis: epochs must be >= 1");
    }
    if (!(learning_rate > 0.0)) {
        throw ConfigError("anfis: learning rate must be positive");
    }
    if (data.empty()) {
        throw ConfigError("anfis: training set is empty");
    }
    for (const auto& s : data) {
        if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.target)) {
            throw ConfigError("anfis: training set contains non-finite values");
        }
    }
    net.validate();

    TrainResult result;
    result.initial_rmse = rmse(net, data);
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::VectorXd targets(n);
    for (Eigen::Index s = 0; s < n; ++s) {
        targets(s) = data[static_cast<std::size_t>(s)].target;
    }

    double lr = learning_rate;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        EpochRecord rec;
        rec.rmse_before_lse = rmse(net, data);

        // Consequents by minimum-norm least squares with premises frozen.
        const Eigen::MatrixXd a = design_matrix(net, data);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
        const Eigen::VectorXd theta = cod.solve(targets);
        rec.rank_deficient = cod.rank() < a.cols();
        for (std::size_t j = 0; j < net.consequents.size(); ++j) {
            const auto k = static_cast<Eigen::Index>(3 * j);
            net.consequents[j] = {theta(k), theta(k + 1), theta(k + 2)};
        }
        rec.rmse_after_lse = rmse(net, data);

        // One batch gradient step on the premise parameters.
        std::vector<BellMf> gx(net.mfs_x.size(), BellMf{0.0, 0.0});
        std::vector<BellMf> gy(net.mfs_y.size(), BellMf{0.0, 0.0});
        for (const auto& s : data) {
            const double e = forward(net, s.x, s.y) - s.target;
            const Gradient g = gradient(net, s.x, s.y);
            for (std::size_t k = 0; k < gx.size(); ++k) {
                gx[k].a += e * g.mfs_x[k].a;
                gx[k].d += e * g.mfs_x[k].d;
            }
            for (std::size_t k = 0; k < gy.size(); ++k) {
                gy[k].a += e * g.mfs_y[k].a;
                gy[k].d += e * g.mfs_y[k].d;
            }
        }
        AnfisNet trial = net;
        const double inv_n = 1.0 / static_cast<double>(data.size());
        auto apply = [&](std::vector<BellMf>& mfs, const std::vector<BellMf>& g) {
            for (std::size_t k = 0; k < mfs.size(); ++k) {
                mfs[k].a = std::max(mfs[k].a - lr * g[k].a * inv_n, 1e-6);
                mfs[k].d -= lr * g[k].d * inv_n;
            }
        };
        apply(trial.mfs_x, gx);
        apply(trial.mfs_y, gy);
        const double trial_rmse = rmse(trial, data);
        if (trial_rmse <= rec.rmse_after_lse) {
            net = std::move(trial);
            rec.rmse = trial_rmse;
        } else {
            lr *= 0.5;
            rec.rmse = rec.rmse_after_lse;
        }
        rec.learning_rate = lr;
        result.rmse.push_back(rec.rmse);
        result.epochs.push_back(rec);
    }
    net.trained = true;
    result.net = std::move(net);
    return result;
}

void save(const AnfisNet& net, std::ostream& out) {
    net.validate();
    std::ostringstream s;
    s.precision(17);
    s << "anfis 1\n";
    s << "mfs_x " << net.mfs_x.size() << '\n';
    for (const auto& mf : net.mfs_x) {
        s << mf.a << ' ' << mf.d << '\n';
    }
    s << "mfs_y " << net.mfs_y.size() << '\n';
    for (const auto& mf : net.mfs_y) {
        s << mf.a << ' ' << mf.d << '\n';
    }
    s << "rules " << net.consequents.size() << '\n';
    for (const auto& c : net.consequents) {
        s << c.p << ' ' << c.q << ' ' << c.r << '\n';
    }
    out << s.str();
}

AnfisNet load(std::istream& in) {
    expect_token(in, "anfis");
    int version = 0;
    if (!(in >> version) || version != 1) {
        throw ConfigError("anfis parameter file: unsupported version");
    }
    AnfisNet net;
    net.mfs_x = read_mfs(in, "mfs_x");
    net.mfs_y = read_mfs(in, "mfs_y");
    expect_token(in, "rules");
    std::size_t rules = 0;
    if (!(in >> rules)) {
        throw ConfigError("anfis parameter file: bad rule count");
    }
    net.consequents.resize(rules);
    for (auto& c : net.consequents) {
        if (!(in >> c.p >> c.q >> c.r)) {
            throw ConfigError("anfis parameter file: truncated rules block");
        }
    }
    net.validate();
    net.trained = true;
    return net;
}

} // namespace anroa::anfis
