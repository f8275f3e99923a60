// Command-line front end over the anroa library.

#include "anroa/anfis.hpp"
#include "anroa/errors.hpp"
#include "anroa/mppt.hpp"
#include "anroa/runner.hpp"
#include "anroa/scenario_file.hpp"
#include "anroa/trace_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace anroa;

namespace {

enum Exit : int { ok = 0, usage = 1, fault = 2, io_failure = 3 };

struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoFailure(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
    }
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoFailure("cannot open " + path.string() + " for writing");
    }
    body(out);
    out.flush();
    if (!out) {
        throw IoFailure("write failed: " + path.string());
    }
}

// Maps library exceptions onto exit codes; the message goes to `err`.
int guarded(std::ostream& err, const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const IoFailure& e) {
        err << "error: " << e.what() << '\n';
        return io_failure;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return io_failure;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const DegenerateInputError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const SimulationFault& e) {
        err << "fault: " << e.what() << '\n';
        return fault;
    } catch (const ModelError& e) {
        err << "fault: " << e.what() << '\n';
        return fault;
    }
}

struct Emit {
    bool csv = false;
    bool svg = false;
    bool summary = false;
};

Emit parse_emit(const std::string& list) {
    Emit e;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "csv") {
            e.csv = true;
        } else if (item == "svg") {
            e.svg = true;
        } else if (item == "summary") {
            e.summary = true;
        } else if (!item.empty()) {
            throw ConfigError("--emit: unknown output '" + item + "' (use csv, svg, summary)");
        }
    }
    return e;
}

std::vector<double> tail(const std::vector<double>& x, std::size_t n) {
    return {x.end() - static_cast<std::ptrdiff_t>(std::min(n, x.size())), x.end()};
}

void write_figures(const fs::path& dir, const sim::SimTrace& tr, const sim::ScenarioConfig& cfg) {
    write_file(dir / "v_dc.svg", [&](std::ostream& o) { io::write_svg_lines(o, "DC link voltage (V)", tr.time, {{"v_dc", &tr.v_dc}}); });
    write_file(dir / "power.svg", [&](std::ostream& o) {
        io::write_svg_lines(o, "Power (W)", tr.time,
                            {{"p_pv", &tr.p_pv}, {"p_load", &tr.p_load}, {"p_grid", &tr.p_g}});
    });
    const auto n = 3 * analysis::samples_per_cycle(cfg.grid.freq, 1.0 / tr.step);
    const auto t = tail(tr.time, n);
    const auto ia = tail(tr.i_g[0], n);
    const auto ib = tail(tr.i_g[1], n);
    const auto ic = tail(tr.i_g[2], n);
    write_file(dir / "grid_current.svg", [&](std::ostream& o) {
        io::write_svg_lines(o, "Grid current (A)", t, {{"a", &ia}, {"b", &ib}, {"c", &ic}});
    });
    const auto la = tail(tr.i_load[0], n);
    const auto lb = tail(tr.i_load[1], n);
    const auto lc = tail(tr.i_load[2], n);
    write_file(dir / "load_current.svg", [&](std::ostream& o) {
        io::write_svg_lines(o, "Load current (A)", t, {{"a", &la}, {"b", &lb}, {"c", &lc}});
    });
    const auto spectrum = analysis::thd(tr.i_g[0], cfg.grid.freq, 1.0 / tr.step);
    write_file(dir / "grid_spectrum.svg",
               [&](std::ostream& o) { io::write_svg_spectrum(o, "Grid current harmonics, phase a (A)", spectrum); });
}

std::vector<std::string> notes_for(const run::Outcome& r, run::Variant v) {
    std::vector<std::string> notes;
    notes.push_back("variant: " + run::variant_name(v));
    notes.push_back(fmt::format("seed: {}", r.config.seed));
    notes.push_back(fmt::format("vsc gains: kp={:.6g} ki={:.6g} band={:.6g}", r.config.vsc.kp, r.config.vsc.ki,
                                r.config.vsc.band));
    if (r.tuning) {
        notes.push_back(fmt::format("tuning cost: {:.6g} (configured gains {:.6g})", r.tuning->cost,
                                    r.tuning->default_cost));
    }
    return notes;
}

struct RunRequest {
    fs::path scenario;
    fs::path out;
    std::optional<std::uint64_t> seed;
    run::Variant variant = run::Variant::proposed;
    Emit emit;
};

// One scenario, start to finish. Messages go to `log` so concurrent runs do
// not interleave.
int run_one(const RunRequest& req, std::ostream& log) {
    return guarded(log, [&] {
        auto cfg = io::load_scenario(req.scenario.string());
        if (req.seed) {
            cfg.seed = *req.seed;
        }
        ensure_dir(req.out);
        const auto r = run::run_variant(cfg, req.variant);
        const auto name = req.scenario.stem().string();
        if (req.emit.csv) {
            write_file(req.out / "trace.csv", [&](std::ostream& o) { io::write_trace_csv(o, r.trace); });
        }
        if (req.emit.summary) {
            write_file(req.out / "summary.txt", [&](std::ostream& o) {
                io::write_summary(o, name, r.trace, r.summary ? &*r.summary : nullptr, notes_for(r, req.variant));
            });
        }
        if (r.trace.faulted) {
            log << fmt::format("{}: fault at t={:.6f} s: {}\n", name, r.trace.fault_time, r.trace.fault_message);
            return static_cast<int>(fault);
        }
        if (req.emit.csv) {
            write_file(req.out / "thd.csv",
                       [&](std::ostream& o) { io::write_thd_csv(o, r.trace, r.config.grid.freq); });
        }
        if (req.emit.svg) {
            write_figures(req.out, r.trace, r.config);
        }
        const auto& s = *r.summary;
        log << fmt::format("{} [{}]: grid THD {:.2f}%  load THD {:.2f}%  efficiency {:.2f}%  time to track "
                           "{:.4f} s  |Q| {:.0f} var  wall {:.2f} s\n",
                           name, s.label, s.grid_thd_percent, s.load_thd_percent, s.efficiency_percent,
                           s.time_to_track, s.mean_abs_q, s.wall_seconds);
        return static_cast<int>(ok);
    });
}

int cmd_run(const RunRequest& base, bool all, const fs::path& scenario_dir) {
    if (!all) {
        return run_one(base, std::cout);
    }
    std::vector<RunRequest> reqs;
    for (const char* name : {"case1", "case2", "case3"}) {
        RunRequest r = base;
        r.scenario = scenario_dir / (std::string(name) + ".yaml");
        r.out = base.out / name;
        reqs.push_back(r);
    }
    std::vector<std::ostringstream> logs(reqs.size());
    std::vector<std::future<int>> jobs;
    for (std::size_t k = 0; k < reqs.size(); ++k) {
        jobs.push_back(std::async(std::launch::async, [&, k] { return run_one(reqs[k], logs[k]); }));
    }
    int worst = ok;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const int code = jobs[k].get();
        std::cout << logs[k].str();
        worst = std::max(worst, code);
    }
    return worst;
}

struct TrainRequest {
    bool generate = false;
    fs::path dataset;
    fs::path scenario;
    fs::path init;
    fs::path out;
    int epochs = 50;
    int mfs = 4;
    double learning_rate = 0.01;
};

int cmd_train(const TrainRequest& req) {
    return guarded(std::cerr, [&] {
        if (req.generate == !req.dataset.empty()) {
            throw ConfigError("train-anfis: give exactly one of --generate or --dataset");
        }
        if (req.epochs < 1 || req.mfs < 2) {
            throw ConfigError("train-anfis: --epochs must be at least 1 and --mfs at least 2");
        }
        anfis::TrainingSet data;
        if (req.generate) {
            const auto cfg = req.scenario.empty() ? sim::default_scenario() : io::load_scenario(req.scenario.string());
            data = mppt::teacher_dataset(cfg.array, cfg.mppt.teacher);
        } else {
            std::ifstream in(req.dataset);
            if (!in) {
                throw ConfigError("--dataset: cannot open " + req.dataset.string());
            }
            data = io::read_dataset_csv(in);
        }
        anfis::AnfisNet start;
        if (req.init.empty()) {
            start = anfis::initialize(data, static_cast<std::size_t>(req.mfs));
        } else {
            std::ifstream in(req.init);
            if (!in) {
                throw ConfigError("--init: cannot open " + req.init.string());
            }
            start = anfis::load(in);
        }
        const auto result = anfis::hybrid_train(start, data, req.epochs, req.learning_rate);

        ensure_dir(req.out);
        write_file(req.out / "anfis.txt", [&](std::ostream& o) { anfis::save(result.net, o); });
        write_file(req.out / "rmse.csv", [&](std::ostream& o) { io::write_rmse_csv(o, result); });
        if (req.generate) {
            write_file(req.out / "dataset.csv", [&](std::ostream& o) { io::write_dataset_csv(o, data); });
        }
        std::cout << fmt::format("trained on {} samples, {} rules: rmse {:.6g} -> {:.6g}\n", data.size(),
                                 result.net.rule_count(), result.initial_rmse, result.rmse.back());
        return static_cast<int>(ok);
    });
}

int cmd_compare(const fs::path& scenario, const fs::path& out, int seeds) {
    return guarded(std::cerr, [&] {
        if (seeds < 1) {
            throw ConfigError("--seeds: must be at least 1");
        }
        const auto cfg = io::load_scenario(scenario.string());
        ensure_dir(out);
        const auto net = sim::prepare_anfis(cfg);

        struct Job {
            run::Variant variant;
            std::uint64_t seed;
        };
        std::vector<Job> plan{{run::Variant::proposed, cfg.seed}, {run::Variant::po, cfg.seed},
                              {run::Variant::pso_tuned, cfg.seed}};
        for (int s = 1; s <= seeds; ++s) {
            if (static_cast<std::uint64_t>(s) != cfg.seed) {
                plan.push_back({run::Variant::proposed, static_cast<std::uint64_t>(s)});
            }
        }
        std::vector<std::future<run::Outcome>> jobs;
        for (const auto& job : plan) {
            auto c = cfg;
            c.seed = job.seed;
            jobs.push_back(std::async(std::launch::async, [c, job, &net] { return run::run_variant(c, job.variant, &net); }));
        }
        std::vector<run::Outcome> outcomes;
        for (auto& j : jobs) {
            outcomes.push_back(j.get());
        }

        std::vector<analysis::RunSummary> table;
        std::vector<double> proposed_thd;
        for (std::size_t k = 0; k < outcomes.size(); ++k) {
            const auto& o = outcomes[k];
            if (!o.summary) {
                std::cerr << fmt::format("{} (seed {}): fault at t={:.6f} s: {}\n", run::variant_name(plan[k].variant),
                                         plan[k].seed, o.trace.fault_time, o.trace.fault_message);
                return static_cast<int>(fault);
            }
            if (k < 3) {
                table.push_back(*o.summary);
            }
            const bool in_seed_set = plan[k].seed >= 1 && plan[k].seed <= static_cast<std::uint64_t>(seeds);
            if (plan[k].variant == run::Variant::proposed && in_seed_set) {
                proposed_thd.push_back(o.summary->grid_thd_percent);
            }
        }
        const auto rows = analysis::compare(table);
        const auto st = analysis::stats(proposed_thd);
        const auto stats_line =
            st.single ? fmt::format("proposed grid THD over 1 seed: {:.3f}% (no spread from a single run)\n", st.mean)
                      : fmt::format("proposed grid THD over {} seeds: mean {:.3f}%  median {:.3f}%  stddev {:.3f}%\n",
                                    proposed_thd.size(), st.mean, st.median, st.stddev);
        write_file(out / "comparison.csv", [&](std::ostream& o) { analysis::write_comparison_csv(o, rows); });
        write_file(out / "comparison.txt", [&](std::ostream& o) {
            analysis::write_comparison_text(o, rows);
            o << '\n' << stats_line;
        });
        analysis::write_comparison_text(std::cout, rows);
        std::cout << stats_line;
        return static_cast<int>(ok);
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-tied PV simulator with ANFIS MPPT and optimizer-tuned inverter control"};
    app.require_subcommand(1);

    RunRequest run_req;
    std::string variant = "proposed";
    std::string emit = "csv,summary";
    std::uint64_t seed = 0;
    bool all = false;
    std::string scenario_dir = ANROA_SCENARIO_DIR;
    auto* run_cmd = app.add_subcommand("run", "Simulate one scenario (or the three bundled cases with --all)");
    auto* scenario_opt = run_cmd->add_option("--scenario", run_req.scenario, "Scenario YAML file");
    auto* all_flag = run_cmd->add_flag("--all", all, "Run case1, case2 and case3 concurrently");
    scenario_opt->excludes(all_flag);
    run_cmd->add_option("--scenario-dir", scenario_dir, "Where --all looks for the case files")->capture_default_str();
    run_cmd->add_option("--out", run_req.out, "Output directory")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the scenario seed");
    run_cmd->add_option("--variant", variant, "proposed, po or pso-tuned")
        ->check(CLI::IsMember({"proposed", "po", "pso-tuned"}))
        ->capture_default_str();
    run_cmd->add_option("--emit", emit, "Comma-separated outputs: csv, svg, summary")->capture_default_str();

    TrainRequest train_req;
    auto* train_cmd = app.add_subcommand("train-anfis", "Train the MPPT network and write its parameter file");
    train_cmd->add_flag("--generate", train_req.generate, "Build the dataset from the teacher rule");
    train_cmd->add_option("--dataset", train_req.dataset, "Training CSV (x,y,target)");
    train_cmd->add_option("--scenario", train_req.scenario, "Array and teacher settings for --generate");
    train_cmd->add_option("--init", train_req.init, "Start from this parameter file");
    train_cmd->add_option("--out", train_req.out, "Output directory")->required();
    train_cmd->add_option("--epochs", train_req.epochs)->capture_default_str();
    train_cmd->add_option("--mfs", train_req.mfs, "Membership functions per input")->capture_default_str();
    train_cmd->add_option("--learning-rate", train_req.learning_rate)->capture_default_str();

    fs::path cmp_scenario;
    fs::path cmp_out;
    int seeds = 1;
    auto* cmp_cmd = app.add_subcommand("compare", "Run all controller variants on one scenario");
    cmp_cmd->add_option("--scenario", cmp_scenario, "Scenario YAML file")->required();
    cmp_cmd->add_option("--out", cmp_out, "Output directory")->required();
    cmp_cmd->add_option("--seeds", seeds, "Seeds 1..N for the proposed-variant THD statistics")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    if (*run_cmd) {
        if (!all && run_req.scenario.empty()) {
            std::cerr << "error: run needs --scenario or --all\n";
            return usage;
        }
        const int code = guarded(std::cerr, [&] {
            run_req.variant = run::parse_variant(variant);
            run_req.emit = parse_emit(emit);
            return 0;
        });
        if (code != ok) {
            return code;
        }
        if (*seed_opt) {
            run_req.seed = seed;
        }
        return cmd_run(run_req, all, scenario_dir);
    }
    if (*train_cmd) {
        return cmd_train(train_req);
    }
    return cmd_compare(cmp_scenario, cmp_out, seeds);
}
