// SPDX-License-Identifier: Apache-2.0
#include "risobf/config_io.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef RISOBF_VERSION
#define RISOBF_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace risobf;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> modes;
    bool serial = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config, "JSON config file (defaults are used when omitted)");
    app->add_option("-o,--out", c.out, "Output directory")->capture_default_str();
    app->add_option("-s,--seed", c.seed, "Base seed (overrides the config)");
    app->add_option("-m,--mode", c.modes, "proposed-adaptive | proposed-fixed | baseline-sense-max (repeatable)");
    app->add_flag("--serial", c.serial, "Use the serial reference kernels");
}

ExperimentSpec load(const Common& c) {
    ExperimentSpec spec = c.config.empty() ? experiment_from_json(json::object()) : load_experiment(c.config);
    if (c.seed) spec.scenario.seed = *c.seed;
    if (!c.modes.empty()) {
        spec.modes.clear();
        for (const auto& m : c.modes) spec.modes.push_back(ModeSpec{parse_mode(m), std::nullopt, ""});
    }
    spec.validate();
    return spec;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

json versions() {
    json v = {{"risobf", RISOBF_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__},
              {"cplusplus", __cplusplus}};
#ifdef _OPENMP
    v["openmp"] = _OPENMP;
#endif
    return v;
}

void write_meta(const fs::path& dir, const std::string& command, const ExperimentSpec& spec, const json& result) {
    json meta = {{"command", command}, {"config", experiment_to_json(spec)}, {"versions", versions()},
                 {"result", result}};
    auto os = open_out(dir, "meta.json");
    os << meta.dump(2) << '\n';
}

void write_wall(const fs::path& dir, double seconds) {
    auto os = open_out(dir, "timing.csv");
    os << "record,wall_seconds\ntotal," << seconds << '\n';
}

json run_summary(const RunResult& r) {
    json notes = json::array();
    for (const auto& n : r.trace.notes) notes.push_back(n);
    return {{"init_feasible", r.initFeasible},
            {"converged", r.converged},
            {"outer_iterations", r.outerIterations},
            {"max_detector_sinr_db", r.maxDetectorSinr > 0.0 ? linear_to_db(r.maxDetectorSinr) : -1e300},
            {"interference", r.interference},
            {"nr", r.partition.numReflecting()},
            {"reflecting", r.partition.reflecting()},
            {"nr_history", r.trace.nrHistory},
            {"min_sensing_ratio", r.report.minSensingRatio},
            {"min_comm_ratio", r.report.minCommRatio},
            {"power_ratio", r.report.powerRatio},
            {"max_modulus_dev", r.report.maxModulusDev},
            {"u_norm_dev", r.report.uNormDev},
            {"constraints_ok", r.report.ok()},
            {"degraded", r.trace.degraded},
            {"notes", notes}};
}

RunResult run_single(const ExperimentSpec& spec) {
    const ModeSpec& m = spec.modes.front();
    ScenarioConfig cfg = spec.scenario;
    if (m.reflectRatio) cfg.initialReflectRatio = *m.reflectRatio;
    return run_main(cfg, spec.settings, m.mode);
}

int cmd_run(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentSpec spec = load(c);
    const RunResult r = run_single(spec);
    const fs::path dir(c.out);
    {
        auto os = open_out(dir, "trace.csv");
        write_trace_csv(r.trace, os);
    }
    {
        auto os = open_out(dir, "timing.csv");
        write_timing_csv(r.trace, os);
        os << "total," << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << '\n';
    }
    write_meta(dir, "run", spec, run_summary(r));
    std::cout << "mode " << spec.modes.front().name() << ", seed " << spec.scenario.seed << ": max detector SINR "
              << (r.maxDetectorSinr > 0 ? linear_to_db(r.maxDetectorSinr) : -1e300) << " dB, N_r "
              << r.partition.numReflecting() << (r.initFeasible ? "" : " (initialization infeasible)") << '\n';
    return r.initFeasible ? 0 : 2;
}

int cmd_sweep(const Common& c, int realizations, const std::string& param, const std::vector<double>& values) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentSpec spec = load(c);
    if (realizations > 0) spec.realizations = realizations;
    if (!param.empty()) {
        spec.sweepParam = parse_sweep_param(param);
        spec.sweepValues = values;
    }
    spec.validate();
    const AggregateResult agg = c.serial ? run_experiment_serial(spec) : run_experiment(spec);
    const fs::path dir(c.out);
    {
        auto os = open_out(dir, "aggregate.csv");
        write_aggregate_csv(agg, os);
    }
    write_wall(dir, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    json points = json::array();
    for (const auto& p : agg.points) {
        json errs = json::array();
        for (const auto& r : p.runs) {
            if (!r.error.empty()) errs.push_back({{"seed", r.seed}, {"error", r.error}});
        }
        points.push_back({{"sweep_value", p.sweepValue},
                          {"label", p.label},
                          {"feasible", p.feasible},
                          {"realizations", p.realizations},
                          {"errors", errs}});
    }
    write_meta(dir, "sweep", spec, {{"points", points}});
    write_aggregate_csv(agg, std::cout);
    return 0;
}

int cmd_heatmap(const Common& c, const std::string& grid) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentSpec spec = load(c);
    if (!grid.empty()) {
        const auto x = grid.find('x');
        if (x == std::string::npos) throw InvalidArgument("--grid expects AZxEL, e.g. 21x21");
        spec.heatmap.azPoints = std::stoi(grid.substr(0, x));
        spec.heatmap.elPoints = std::stoi(grid.substr(x + 1));
        spec.validate();
    }
    const RunResult r = run_single(spec);
    const fs::path dir(c.out);
    {
        auto os = open_out(dir, "trace.csv");
        write_trace_csv(r.trace, os);
    }
    json summary = run_summary(r);
    if (r.initFeasible) {
        const HeatmapResult h = c.serial ? heatmap_serial(r.state, r.scenario.channels, r.partition, spec.scenario,
                                                          spec.heatmap, spec.scenario.tS)
                                         : heatmap(r.state, r.scenario.channels, r.partition, spec.scenario,
                                                   spec.heatmap, spec.scenario.tS);
        auto fa = open_out(dir, "heatmap_fa.csv");
        write_heatmap_csv(h, h.fa, fa);
        auto md = open_out(dir, "heatmap_md.csv");
        write_heatmap_csv(h, h.md, md);
        summary["heatmap_min_fa"] = h.fa.minCoeff();
        summary["heatmap_min_md"] = h.md.minCoeff();
    }
    write_wall(dir, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    write_meta(dir, "heatmap", spec, summary);
    std::cout << "heatmap " << spec.heatmap.azPoints << "x" << spec.heatmap.elPoints << " written to " << dir << '\n';
    return r.initFeasible ? 0 : 2;
}

int cmd_oracle(const Common& c, double omega0, double omega1, std::optional<double> threshold, int tS,
               long long trials) {
    const std::uint64_t seed = c.seed.value_or(1);
    const double thr = threshold.value_or(detection_threshold(omega0, omega1));
    const OracleResult r = c.serial ? detection_oracle_serial(omega0, omega1, thr, tS, trials, seed)
                                    : detection_oracle(omega0, omega1, thr, tS, trials, seed);
    const double gamma = omega1 / omega0 - 1.0;
    const double pbar = fa_averaged(std::exp(-thr / omega0), tS);
    const double qbar = md_averaged(-std::expm1(-thr / omega1), tS);
    const fs::path dir(c.out);
    auto os = open_out(dir, "oracle.csv");
    std::ostringstream line;
    line.precision(6);
    line << omega0 << ',' << omega1 << ',' << thr << ',' << tS << ',' << trials << ',' << r.pHat << ',' << r.pSigma
         << ',' << pbar << ',' << r.qHat << ',' << r.qSigma << ',' << qbar << '\n';
    const std::string header = "omega0,omega1,threshold,t_s,trials,p_hat,p_sigma,p_closed,q_hat,q_sigma,q_closed\n";
    os << header << line.str();
    std::cout << "gamma " << gamma << '\n' << header << line.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-assisted ISAC target obfuscation"};
    app.require_subcommand(1);

    Common runC, sweepC, heatC, oracleC;
    auto* run = app.add_subcommand("run", "Optimize one realization and write trace.csv");
    add_common(run, runC);

    auto* sw = app.add_subcommand("sweep", "Monte Carlo campaign, optionally over a parameter");
    add_common(sw, sweepC);
    int realizations = 0;
    std::string param;
    std::vector<double> values;
    sw->add_option("-n,--realizations", realizations, "Realizations per point (overrides the config)");
    sw->add_option("-p,--param", param, "p_max_dbm | gamma_c_db | gamma_s_db | n");
    sw->add_option("-v,--values", values, "Sweep values")->delimiter(',');

    auto* hm = app.add_subcommand("heatmap", "FA/MD maps over the sensing region for one realization");
    add_common(hm, heatC);
    std::string grid;
    hm->add_option("-g,--grid", grid, "Grid as AZxEL (default 21x21)");

    auto* orc = app.add_subcommand("oracle", "Monte Carlo check of the detection closed forms");
    add_common(orc, oracleC);
    double omega0 = 1.0, omega1 = 2.0;
    std::optional<double> threshold;
    int tS = 1;
    long long trials = 100000;
    orc->add_option("--omega0", omega0)->capture_default_str();
    orc->add_option("--omega1", omega1)->capture_default_str();
    orc->add_option("--threshold", threshold, "Defaults to the likelihood-ratio threshold");
    orc->add_option("--ts", tS)->capture_default_str();
    orc->add_option("--trials", trials)->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(runC);
        if (sw->parsed()) return cmd_sweep(sweepC, realizations, param, values);
        if (hm->parsed()) return cmd_heatmap(heatC, grid);
        if (orc->parsed()) return cmd_oracle(oracleC, omega0, omega1, threshold, tS, trials);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
