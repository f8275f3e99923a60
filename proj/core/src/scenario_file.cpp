#include "anroa/scenario_file.hpp"

#include "anroa/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace anroa::io {

namespace {

std::string at_line(const YAML::Node& n) {
    const auto m = n.Mark();
    return m.is_null() ? std::string{} : " (line " + std::to_string(m.line + 1) + ")";
}

/// One mapping of the file; tracks which keys were consumed.
class Section {
public:
    Section(const YAML::Node& node, std::string path, std::string origin)
        : node_(node), path_(std::move(path)), origin_(std::move(origin)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            fail(path_, node_, "expected a mapping");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
    }

    YAML::Node child(const std::string& key) { return has(key) ? node_[key] : YAML::Node{}; }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!has(key)) {
            return;
        }
        const YAML::Node n = node_[key];
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            fail(field(key), n, expected<T>());
        }
    }

    Section sub(const std::string& key) { return Section(child(key), field(key), origin_); }

    /// Rejects keys nobody asked for.
    void finish() const {
        if (!node_ || !node_.IsMap()) {
            return;
        }
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) {
                fail(field(key), kv.first, "unknown key");
            }
        }
    }

    [[noreturn]] void fail(const std::string& field, const YAML::Node& n, const std::string& what) const {
        throw ConfigError(origin_ + ": " + field + ": " + what + at_line(n));
    }

    const std::string& origin() const { return origin_; }

private:
    template <class T>
    static std::string expected() {
        if constexpr (std::is_same_v<T, bool>) {
            return "expected true or false";
        } else if constexpr (std::is_integral_v<T>) {
            return "expected an integer";
        } else if constexpr (std::is_floating_point_v<T>) {
            return "expected a number";
        } else if constexpr (std::is_same_v<T, std::string>) {
            return "expected a string";
        } else {
            return "expected a list of numbers";
        }
    }

    YAML::Node node_;
    std::string path_;
    std::string origin_;
    std::set<std::string> seen_;
};

template <class E>
E parse_enum(Section& s, const std::string& key, E current, std::initializer_list<std::pair<const char*, E>> names) {
    std::string text;
    s.get(key, text);
    if (text.empty()) {
        return current;
    }
    std::string allowed;
    for (const auto& [name, value] : names) {
        if (text == name) {
            return value;
        }
        allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    }
    s.fail(s.field(key), s.child(key), "must be one of " + allowed);
}

void read_module(Section s, pv::PvModuleParams& m) {
    s.get("v_mp", m.v_mp);
    s.get("i_mp", m.i_mp);
    s.get("v_oc", m.v_oc);
    s.get("i_sc", m.i_sc);
    s.get("ideality", m.ideality);
    s.get("cells_in_series", m.cells_in_series);
    s.get("ki_isc", m.ki_isc);
    s.get("kv_voc", m.kv_voc);
    s.finish();
}

void read_array(Section s, pv::PvArrayConfig& a) {
    read_module(s.sub("module"), a.module);
    s.get("n_series", a.n_series);
    s.get("n_parallel", a.n_parallel);
    s.get("temperature", a.temperature);
    s.get("bypass_drop", a.bypass_drop);
    if (s.has("sections")) {
        const auto list = s.child("sections");
        if (!list.IsSequence()) {
            s.fail(s.field("sections"), list, "expected a list");
        }
        a.sections.clear();
        for (std::size_t k = 0; k < list.size(); ++k) {
            Section e(list[k], s.field("sections[" + std::to_string(k) + "]"), s.origin());
            pv::Section sec;
            e.get("modules", sec.modules);
            e.get("irradiance", sec.irradiance);
            e.finish();
            a.sections.push_back(sec);
        }
    }
    s.finish();
}

void read_grid(Section s, sim::GridParams& g) {
    s.get("v_ll_rms", g.v_ll_rms);
    s.get("freq", g.freq);
    s.get("source_inductance", g.source_inductance);
    s.get("source_resistance", g.source_resistance);
    s.finish();
}

void read_plant(Section s, sim::PlantParams& p) {
    s.get("dc_capacitance", p.dc_capacitance);
    s.get("v_dc0", p.v_dc0);
    s.get("boost_inductance", p.boost_inductance);
    s.get("filter_inductance", p.filter_inductance);
    s.get("filter_resistance", p.filter_resistance);
    s.get("ripple_resistance", p.ripple_resistance);
    s.get("ripple_capacitance", p.ripple_capacitance);
    s.get("current_rating", p.current_rating);
    s.finish();
}

void read_load(Section s, sim::LoadConfig& l) {
    s.get("bridge_r", l.bridge_r);
    s.get("bridge_l", l.bridge_l);
    if (s.has("phase_disconnect")) {
        Section d = s.sub("phase_disconnect");
        sim::PhaseDisconnect pd;
        const auto phase = d.child("phase");
        if (phase) {
            const auto text = phase.as<std::string>();
            if (text == "a" || text == "0") {
                pd.phase = 0;
            } else if (text == "b" || text == "1") {
                pd.phase = 1;
            } else if (text == "c" || text == "2") {
                pd.phase = 2;
            } else {
                d.fail(d.field("phase"), phase, "must be a, b or c");
            }
        }
        d.get("t_on", pd.t_on);
        d.get("t_off", pd.t_off);
        d.finish();
        l.phase_disconnect = pd;
    }
    s.finish();
}

void read_teacher(Section s, mppt::TeacherConfig& t) {
    s.get("irradiance", t.irradiance);
    s.get("points_per_curve", t.points_per_curve);
    s.get("v_lo_frac", t.v_lo_frac);
    s.get("v_hi_frac", t.v_hi_frac);
    s.get("v_dc", t.v_dc);
    s.get("gain", t.gain);
    s.get("min_step", t.min_step);
    s.get("max_step", t.max_step);
    s.finish();
}

void read_mppt(Section s, sim::MpptSettings& m, const std::string& origin) {
    m.variant = parse_enum(s, "variant", m.variant,
                           {{"anfis", sim::MpptVariant::anfis}, {"po", sim::MpptVariant::po},
                            {"dcref", sim::MpptVariant::dcref}});
    s.get("period", m.period);
    s.get("initial_duty", m.initial_duty);
    s.get("delta_d", m.delta_d);
    s.get("epsilon", m.epsilon);
    s.get("vref_step", m.vref_step);
    s.get("gamma", m.gamma);
    s.get("dc_max", m.dc_max);
    s.get("dcref_duty", m.dcref_duty);
    s.get("anfis_mfs", m.anfis_mfs);
    s.get("anfis_epochs", m.anfis_epochs);
    s.get("anfis_learning_rate", m.anfis_learning_rate);
    s.get("anfis_file", m.anfis_file);
    if (!m.anfis_file.empty() && std::filesystem::path(m.anfis_file).is_relative() && origin.front() != '<') {
        m.anfis_file = (std::filesystem::path(origin).parent_path() / m.anfis_file).string();
    }
    read_teacher(s.sub("teacher"), m.teacher);
    s.finish();
}

void read_vsc(Section s, vsc::VscConfig& v) {
    s.get("kp", v.kp);
    s.get("ki", v.ki);
    s.get("band", v.band);
    s.get("v_dcref", v.v_dcref);
    s.get("sample_period", v.sample_period);
    s.get("pi_period", v.pi_period);
    s.get("rated_power", v.rated_power);
    s.get("windup_factor", v.windup_factor);
    v.formula = parse_enum(s, "feedforward", v.formula,
                           {{"per_phase", vsc::FeedforwardFormula::per_phase},
                            {"line", vsc::FeedforwardFormula::line}});
    s.finish();
}

void read_tuning(Section s, sim::TuningSettings& t) {
    t.optimizer = parse_enum(s, "optimizer", t.optimizer,
                             {{"none", sim::TuneOptimizer::none}, {"roa", sim::TuneOptimizer::roa},
                              {"pso", sim::TuneOptimizer::pso}});
    s.get("episode", t.episode);
    s.get("dc_weight", t.dc_weight);
    s.get("population", t.population);
    s.get("iterations", t.iterations);
    Section b = s.sub("bounds");
    const char* names[] = {"kp", "ki", "band"};
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> pair;
        b.get(names[k], pair);
        if (pair.empty()) {
            continue;
        }
        if (pair.size() != 2) {
            b.fail(b.field(names[k]), b.child(names[k]), "expected [low, high]");
        }
        t.bounds[k] = {pair[0], pair[1]};
    }
    b.finish();
    s.finish();
}

void read_schedule(Section& root, std::vector<sim::IrradianceEvent>& out) {
    if (!root.has("schedule")) {
        return;
    }
    const auto list = root.child("schedule");
    if (!list.IsSequence()) {
        root.fail("schedule", list, "expected a list");
    }
    out.clear();
    for (std::size_t k = 0; k < list.size(); ++k) {
        Section e(list[k], "schedule[" + std::to_string(k) + "]", root.origin());
        sim::IrradianceEvent ev;
        e.get("time", ev.time);
        e.get("irradiance", ev.irradiance);
        e.finish();
        out.push_back(ev);
    }
}

} // namespace

sim::ScenarioConfig parse_scenario(std::string_view text, const std::string& origin) {
    YAML::Node doc;
    try {
        doc = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError(origin + ": parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    auto cfg = sim::default_scenario();
    Section root(doc, "", origin);

    Section sc = root.sub("scenario");
    sc.get("name", cfg.name);
    sc.get("duration", cfg.duration);
    sc.get("step", cfg.step);
    sc.get("seed", cfg.seed);
    sc.finish();

    read_array(root.sub("pv_array"), cfg.array);
    read_grid(root.sub("grid"), cfg.grid);
    read_plant(root.sub("plant"), cfg.plant);
    read_load(root.sub("load"), cfg.load);
    read_mppt(root.sub("mppt"), cfg.mppt, origin);
    read_vsc(root.sub("vsc"), cfg.vsc);
    read_tuning(root.sub("tuning"), cfg.tuning);
    read_schedule(root, cfg.schedule);
    root.finish();

    cfg.array.module = pv::fit_module(cfg.array.module);
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

sim::ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open scenario file");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

std::string dump_scenario(const sim::ScenarioConfig& cfg) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << cfg.name;
    out << YAML::Key << "duration" << YAML::Value << cfg.duration;
    out << YAML::Key << "step" << YAML::Value << cfg.step;
    out << YAML::Key << "seed" << YAML::Value << cfg.seed;
    out << YAML::EndMap;

    const auto& m = cfg.array.module;
    out << YAML::Key << "pv_array" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "module" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "v_mp" << YAML::Value << m.v_mp << YAML::Key << "i_mp" << YAML::Value << m.i_mp;
    out << YAML::Key << "v_oc" << YAML::Value << m.v_oc << YAML::Key << "i_sc" << YAML::Value << m.i_sc;
    out << YAML::Key << "ideality" << YAML::Value << m.ideality;
    out << YAML::Key << "cells_in_series" << YAML::Value << m.cells_in_series;
    out << YAML::Key << "ki_isc" << YAML::Value << m.ki_isc << YAML::Key << "kv_voc" << YAML::Value << m.kv_voc;
    out << YAML::EndMap;
    out << YAML::Key << "n_series" << YAML::Value << cfg.array.n_series;
    out << YAML::Key << "n_parallel" << YAML::Value << cfg.array.n_parallel;
    out << YAML::Key << "temperature" << YAML::Value << cfg.array.temperature;
    out << YAML::Key << "bypass_drop" << YAML::Value << cfg.array.bypass_drop;
    if (!cfg.array.sections.empty()) {
        out << YAML::Key << "sections" << YAML::Value << YAML::BeginSeq;
        for (const auto& s : cfg.array.sections) {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "modules" << YAML::Value << s.modules << YAML::Key
                << "irradiance" << YAML::Value << s.irradiance << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;

    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "v_ll_rms" << YAML::Value << cfg.grid.v_ll_rms;
    out << YAML::Key << "freq" << YAML::Value << cfg.grid.freq;
    out << YAML::Key << "source_inductance" << YAML::Value << cfg.grid.source_inductance;
    out << YAML::Key << "source_resistance" << YAML::Value << cfg.grid.source_resistance;
    out << YAML::EndMap;

    const auto& p = cfg.plant;
    out << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dc_capacitance" << YAML::Value << p.dc_capacitance;
    out << YAML::Key << "v_dc0" << YAML::Value << p.v_dc0;
    out << YAML::Key << "boost_inductance" << YAML::Value << p.boost_inductance;
    out << YAML::Key << "filter_inductance" << YAML::Value << p.filter_inductance;
    out << YAML::Key << "filter_resistance" << YAML::Value << p.filter_resistance;
    out << YAML::Key << "ripple_resistance" << YAML::Value << p.ripple_resistance;
    out << YAML::Key << "ripple_capacitance" << YAML::Value << p.ripple_capacitance;
    out << YAML::Key << "current_rating" << YAML::Value << p.current_rating;
    out << YAML::EndMap;

    out << YAML::Key << "load" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "bridge_r" << YAML::Value << cfg.load.bridge_r;
    out << YAML::Key << "bridge_l" << YAML::Value << cfg.load.bridge_l;
    if (cfg.load.phase_disconnect) {
        const auto& d = *cfg.load.phase_disconnect;
        out << YAML::Key << "phase_disconnect" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "phase" << YAML::Value << std::string(1, static_cast<char>('a' + d.phase));
        out << YAML::Key << "t_on" << YAML::Value << d.t_on << YAML::Key << "t_off" << YAML::Value << d.t_off;
        out << YAML::EndMap;
    }
    out << YAML::EndMap;

    const auto& mp = cfg.mppt;
    static const char* variants[] = {"anfis", "po", "dcref"};
    out << YAML::Key << "mppt" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "variant" << YAML::Value << variants[static_cast<int>(mp.variant)];
    out << YAML::Key << "period" << YAML::Value << mp.period;
    out << YAML::Key << "initial_duty" << YAML::Value << mp.initial_duty;
    out << YAML::Key << "delta_d" << YAML::Value << mp.delta_d;
    out << YAML::Key << "epsilon" << YAML::Value << mp.epsilon;
    out << YAML::Key << "vref_step" << YAML::Value << mp.vref_step;
    out << YAML::Key << "gamma" << YAML::Value << mp.gamma;
    out << YAML::Key << "dc_max" << YAML::Value << mp.dc_max;
    out << YAML::Key << "dcref_duty" << YAML::Value << mp.dcref_duty;
    out << YAML::Key << "anfis_mfs" << YAML::Value << mp.anfis_mfs;
    out << YAML::Key << "anfis_epochs" << YAML::Value << mp.anfis_epochs;
    out << YAML::Key << "anfis_learning_rate" << YAML::Value << mp.anfis_learning_rate;
    if (!mp.anfis_file.empty()) {
        out << YAML::Key << "anfis_file" << YAML::Value << mp.anfis_file;
    }
    out << YAML::Key << "teacher" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "irradiance" << YAML::Value << YAML::Flow << mp.teacher.irradiance;
    out << YAML::Key << "points_per_curve" << YAML::Value << mp.teacher.points_per_curve;
    out << YAML::Key << "v_lo_frac" << YAML::Value << mp.teacher.v_lo_frac;
    out << YAML::Key << "v_hi_frac" << YAML::Value << mp.teacher.v_hi_frac;
    out << YAML::Key << "v_dc" << YAML::Value << mp.teacher.v_dc;
    out << YAML::Key << "gain" << YAML::Value << mp.teacher.gain;
    out << YAML::Key << "min_step" << YAML::Value << mp.teacher.min_step;
    out << YAML::Key << "max_step" << YAML::Value << mp.teacher.max_step;
    out << YAML::EndMap << YAML::EndMap;

    const auto& v = cfg.vsc;
    out << YAML::Key << "vsc" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kp" << YAML::Value << v.kp << YAML::Key << "ki" << YAML::Value << v.ki;
    out << YAML::Key << "band" << YAML::Value << v.band;
    out << YAML::Key << "v_dcref" << YAML::Value << v.v_dcref;
    out << YAML::Key << "sample_period" << YAML::Value << v.sample_period;
    out << YAML::Key << "pi_period" << YAML::Value << v.pi_period;
    out << YAML::Key << "rated_power" << YAML::Value << v.rated_power;
    out << YAML::Key << "windup_factor" << YAML::Value << v.windup_factor;
    out << YAML::Key << "feedforward" << YAML::Value
        << (v.formula == vsc::FeedforwardFormula::per_phase ? "per_phase" : "line");
    out << YAML::EndMap;

    const auto& t = cfg.tuning;
    static const char* optimizers[] = {"none", "roa", "pso"};
    out << YAML::Key << "tuning" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "optimizer" << YAML::Value << optimizers[static_cast<int>(t.optimizer)];
    out << YAML::Key << "episode" << YAML::Value << t.episode;
    out << YAML::Key << "dc_weight" << YAML::Value << t.dc_weight;
    out << YAML::Key << "population" << YAML::Value << t.population;
    out << YAML::Key << "iterations" << YAML::Value << t.iterations;
    out << YAML::Key << "bounds" << YAML::Value << YAML::BeginMap;
    const char* names[] = {"kp", "ki", "band"};
    for (std::size_t k = 0; k < 3; ++k) {
        out << YAML::Key << names[k] << YAML::Value << YAML::Flow << YAML::BeginSeq << t.bounds[k].first
            << t.bounds[k].second << YAML::EndSeq;
    }
    out << YAML::EndMap << YAML::EndMap;

    if (!cfg.schedule.empty()) {
        out << YAML::Key << "schedule" << YAML::Value << YAML::BeginSeq;
        for (const auto& ev : cfg.schedule) {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "time" << YAML::Value << ev.time << YAML::Key
                << "irradiance" << YAML::Value << YAML::Flow << ev.irradiance << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace anroa::io
