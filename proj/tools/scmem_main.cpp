#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scmem/energy.hpp"
#include "scmem/errors.hpp"
#include "scmem/montecarlo.hpp"
#include "scmem/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scmem;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_parameter("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw invalid_parameter("config file " + path + " is not valid JSON: " + e.what());
    }
    return doc;
}

void write_report(const std::string& dir, const mc::ExperimentReport& rep) {
    fs::create_directories(dir);
    const auto csv = io::trials_csv(rep.trials);
    const auto doc = io::report_document(rep, {{"trials.csv", io::crc32_hex(csv)}});
    std::ofstream(dir + "/trials.csv", std::ios::binary) << csv;
    std::ofstream(dir + "/report.json") << doc.dump(2) << "\n";
}

void apply_sweep_value(json& doc, const std::string& name, double value) {
    const bool model_key =
        name == "n_features" || name == "n_strokes" || name == "n_concepts" || name == "kappa";
    const bool top_key = name == "n_trials" || name == "envelope_c_factor";
    if (!model_key && !top_key)
        throw invalid_parameter("unknown sweep parameter: " + name);
    json& slot = model_key ? doc["model"][name] : doc[name];
    if (name == "kappa" || name == "envelope_c_factor")
        slot = value;
    else
        slot = static_cast<std::uint64_t>(std::llround(value));
}

std::vector<double> parse_sweep_values(const std::string& list) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto comma = list.find(',', start);
        const auto piece =
            list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            const double v = std::stod(piece, &used);
            if (used != piece.size()) throw std::invalid_argument(piece);
            values.push_back(v);
        } catch (const std::exception&) {
            throw invalid_parameter("--sweep value '" + piece + "' is not a number");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (values.empty()) throw invalid_parameter("--sweep needs at least one value");
    return values;
}

int run_energy_demo(const std::string& preset, double dt, std::uint64_t steps) {
    if (preset != "pair") throw invalid_parameter("unknown preset: " + preset);
    const auto model = energy::EnergyModel::make(1, 1, {1.0}, energy::Potential::quadratic());
    energy::DescendOptions opts;
    opts.dt = dt;
    opts.n_steps = steps;
    const auto trace = energy::descend(model, {1.0}, {0.0}, opts);
    bool monotone = true;
    for (std::size_t k = 1; k < trace.size() && monotone; ++k)
        monotone = trace[k].energy <= trace[k - 1].energy + 1e-12;
    const json out = {{"initial_energy", trace.front().energy},
                      {"final_energy", trace.back().energy},
                      {"monotone", monotone}};
    std::cout << out.dump(2) << "\n";
    return monotone ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse stroke-concept associative memory: simulation, decoding and "
                 "failure-bound reporting"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    unsigned jobs = 1;
    std::string out_dir;
    std::string sweep;
    bool used_only = false;
    std::string preset = "pair";
    double dt = 0.01;
    std::uint64_t steps = 1000;

    auto* gen = app.add_subcommand("gen", "sample one trial instance and print it as JSON");
    gen->add_option("--config", config_path, "config JSON path")->required();
    gen->add_option("--seed", seed, "master seed")->required();
    gen->add_option("--trial", trial, "trial index");

    auto* retrieve = app.add_subcommand("retrieve", "decode one trial and print the outcome");
    retrieve->add_option("--config", config_path, "config JSON path")->required();
    retrieve->add_option("--seed", seed, "master seed")->required();
    retrieve->add_option("--trial", trial, "trial index");

    auto* bounds_cmd =
        app.add_subcommand("bounds", "print the closed-form failure bounds for a config");
    bounds_cmd->add_option("--config", config_path, "config JSON path")->required();

    auto* experiment = app.add_subcommand(
        "experiment", "run a trial ensemble; writes report.json and trials.csv");
    experiment->add_option("--config", config_path, "config JSON path")->required();
    experiment->add_option("--seed", seed, "master seed")->required();
    experiment->add_option("--jobs", jobs, "worker threads");
    experiment->add_option("--sweep", sweep, "name=v1,v2,... writes grid.csv over the values");
    experiment->add_option("--out-dir", out_dir, "output directory")->required();

    auto* recovery =
        app.add_subcommand("recovery", "estimate exact stroke-recovery rates for a config");
    recovery->add_option("--config", config_path, "config JSON path")->required();
    recovery->add_option("--seed", seed, "master seed")->required();
    recovery->add_option("--jobs", jobs, "worker threads");
    recovery->add_flag("--used-only", used_only, "score only strokes some concept uses");
    recovery->add_option("--out-dir", out_dir, "output directory")->required();

    auto* demo = app.add_subcommand("energy-demo",
                                    "gradient descent on a one-visible, one-hidden energy pair");
    demo->add_option("--preset", preset, "scenario name (pair)");
    demo->add_option("--dt", dt, "Euler step size");
    demo->add_option("--steps", steps, "number of steps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            auto cfg = io::parse_trial_config(load_json(config_path));
            cfg.master_seed = seed;
            const auto inst = mc::materialize_instance(cfg, trial);
            const json out = {{"strokes", inst.dict.strokes},
                              {"concepts", inst.book.concepts},
                              {"cue", inst.cue.on},
                              {"target", inst.target}};
            std::cout << out.dump(2) << "\n";
        } else if (*retrieve) {
            auto cfg = io::parse_trial_config(load_json(config_path));
            cfg.master_seed = seed;
            const auto r = mc::run_trial(cfg, trial);
            const json out = {{"target", r.target},
                              {"decoded", r.decoded},
                              {"correct", r.correct},
                              {"t_star", r.t_star},
                              {"errors",
                               {{"false_negatives", r.err.false_negatives},
                                {"false_positives", r.err.false_positives}}},
                              {"good_event", r.good_event_held}};
            std::cout << out.dump(2) << "\n";
        } else if (*bounds_cmd) {
            const auto cfg = io::parse_trial_config(load_json(config_path));
            const auto values = mc::bound_assembly(cfg);
            json out;
            if (values.count("margin_t"))
                out["margin_t"] = static_cast<long long>(values.at("margin_t"));
            else
                out["margin_t"] = nullptr;
            json bv = json::object();
            for (const auto& [key, value] : values) bv[key] = value;
            out["bounds"] = std::move(bv);
            std::cout << out.dump(2) << "\n";
        } else if (*experiment) {
            const auto raw = load_json(config_path);
            if (sweep.empty()) {
                auto cfg = io::parse_trial_config(raw);
                cfg.master_seed = seed;
                write_report(out_dir, mc::run_experiment(cfg, jobs));
            } else {
                const auto eq = sweep.find('=');
                if (eq == std::string::npos || eq == 0)
                    throw invalid_parameter("--sweep expects name=v1,v2,...");
                const auto name = sweep.substr(0, eq);
                const auto values = parse_sweep_values(sweep.substr(eq + 1));
                std::string grid = io::grid_csv_header();
                for (const double v : values) {
                    json doc = raw;
                    apply_sweep_value(doc, name, v);
                    auto cfg = io::parse_trial_config(doc);
                    cfg.master_seed = seed;
                    grid += io::grid_csv_row(name, v, mc::run_experiment(cfg, jobs));
                }
                fs::create_directories(out_dir);
                std::ofstream(out_dir + "/grid.csv", std::ios::binary) << grid;
            }
        } else if (*recovery) {
            auto cfg = io::parse_trial_config(load_json(config_path));
            cfg.master_seed = seed;
            write_report(out_dir, mc::run_exact_recovery_experiment(cfg, used_only, jobs));
        } else if (*demo) {
            return run_energy_demo(preset, dt, steps);
        } else {
            std::cout << app.help();
        }
    } catch (const numerical_error& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
