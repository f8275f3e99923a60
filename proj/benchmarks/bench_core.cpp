#include "anroa/analysis.hpp"
#include "anroa/anfis.hpp"
#include "anroa/mppt.hpp"
#include "anroa/optimizers.hpp"
#include "anroa/plant_sim.hpp"
#include "anroa/pv_array.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace anroa;

static void BM_ArrayCurrent(benchmark::State& state) {
    const auto cfg = sim::default_scenario().array;
    double v = 0.0;
    for (auto _ : state) {
        v = v > 560.0 ? 0.0 : v + 7.3;
        benchmark::DoNotOptimize(pv::array_current(cfg, v));
    }
}
BENCHMARK(BM_ArrayCurrent);

static void BM_TrueMpp(benchmark::State& state) {
    auto cfg = sim::default_scenario().array;
    if (state.range(0) == 1) {
        cfg.sections = {{9, 1000.0}, {9, 600.0}};
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(pv::true_mpp(cfg));
    }
}
BENCHMARK(BM_TrueMpp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_AnfisForward(benchmark::State& state) {
    const auto cfg = sim::default_scenario();
    const auto net = mppt::train_teacher(cfg.array, cfg.mppt.teacher, 4, 5).net;
    double x = 0.0;
    for (auto _ : state) {
        x = x > 1.0 ? 0.0 : x + 0.013;
        benchmark::DoNotOptimize(anfis::forward(net, x, 1.0 - x));
    }
}
BENCHMARK(BM_AnfisForward);

static void BM_AnfisEpoch(benchmark::State& state) {
    const auto cfg = sim::default_scenario();
    const auto data = mppt::teacher_dataset(cfg.array, cfg.mppt.teacher);
    const auto start = anfis::initialize(data, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(anfis::hybrid_train(start, data, 1).rmse.back());
    }
}
BENCHMARK(BM_AnfisEpoch)->Unit(benchmark::kMillisecond);

static void BM_RoaSphere(benchmark::State& state) {
    opt::Bounds bounds;
    bounds.limits.assign(5, {-5.0, 5.0});
    const auto sphere = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) {
            s += v * v;
        }
        return s;
    };
    for (auto _ : state) {
        benchmark::DoNotOptimize(opt::roa_minimize(sphere, bounds, opt::RoaParams{}).cost);
    }
}
BENCHMARK(BM_RoaSphere)->Unit(benchmark::kMillisecond);

static void BM_Thd(benchmark::State& state) {
    std::vector<double> x(10000);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double w = 2.0 * std::numbers::pi * 50.0 * static_cast<double>(k) / 1e5;
        x[k] = std::sin(w) + 0.1 * std::sin(5.0 * w);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(analysis::thd(x, 50.0, 1e5).thd_percent);
    }
}
BENCHMARK(BM_Thd)->Unit(benchmark::kMicrosecond);

static void BM_Simulate100ms(benchmark::State& state) {
    auto cfg = sim::default_scenario();
    cfg.duration = 0.1;
    cfg.mppt.variant = sim::MpptVariant::po;
    cfg.grid.source_inductance = state.range(0) == 0 ? 0.0 : cfg.grid.source_inductance;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::run_scenario(cfg).size());
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Simulate100ms)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
