// SPDX-License-Identifier: Apache-2.0
#include "risobf/config_io.hpp"

#include <fstream>
#include <set>

namespace risobf {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    require(j.is_object(), where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        require(allowed.count(it.key()) == 1, where + ": unknown key '" + it.key() + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidArgument(where + "." + key + ": " + e.what());
    }
}

template <class F>
void read_conv(const json& j, const char* key, double& out, F convert, const std::string& where) {
    if (!j.contains(key)) return;
    double v = 0.0;
    read(j, key, v, where);
    out = convert(v);
}

double rad(double deg) { return deg_to_rad(deg); }
double deg(double r) { return r * 180.0 / kPi; }

// Number or array of numbers, converted entry-wise.
template <class F>
void read_list(const json& j, const char* key, std::vector<double>& out, F convert, const std::string& where) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    out.clear();
    if (v.is_number()) {
        out.push_back(convert(v.get<double>()));
    } else if (v.is_array()) {
        for (const auto& x : v) {
            require(x.is_number(), where + "." + key + ": expected numbers");
            out.push_back(convert(x.get<double>()));
        }
    } else {
        throw InvalidArgument(where + "." + key + ": expected a number or an array");
    }
}

Vec3 read_vec3(const json& j, const std::string& where) {
    require(j.is_array() && j.size() == 3, where + ": expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::pair<double, double> read_range(const json& j, const std::string& where) {
    require(j.is_array() && j.size() == 2, where + ": expected [min, max]");
    return {j[0].get<double>(), j[1].get<double>()};
}

void read_geometry(const json& j, Geometry& g) {
    const std::string w = "scenario.geometry";
    check_keys(j, {"bs", "ris", "user_box_min", "user_box_max", "detector", "sensing"}, w);
    if (j.contains("bs")) g.bs = read_vec3(j["bs"], w + ".bs");
    if (j.contains("ris")) g.ris = read_vec3(j["ris"], w + ".ris");
    if (j.contains("user_box_min")) g.userBoxMin = read_vec3(j["user_box_min"], w + ".user_box_min");
    if (j.contains("user_box_max")) g.userBoxMax = read_vec3(j["user_box_max"], w + ".user_box_max");
    if (j.contains("detector")) {
        const json& d = j["detector"];
        check_keys(d, {"azimuth_deg", "elevation_deg", "range_m"}, w + ".detector");
        double az = deg(g.detector.azimuth), el = deg(g.detector.elevation);
        read(d, "azimuth_deg", az, w + ".detector");
        read(d, "elevation_deg", el, w + ".detector");
        read(d, "range_m", g.detector.range, w + ".detector");
        g.detector.azimuth = rad(az);
        g.detector.elevation = rad(el);
    }
    if (j.contains("sensing")) {
        const json& s = j["sensing"];
        check_keys(s, {"range_m", "azimuth_deg", "elevation_deg"}, w + ".sensing");
        read(s, "range_m", g.sensingRange, w + ".sensing");
        if (s.contains("azimuth_deg")) {
            const auto [lo, hi] = read_range(s["azimuth_deg"], w + ".sensing.azimuth_deg");
            g.sensingAzMin = rad(lo);
            g.sensingAzMax = rad(hi);
        }
        if (s.contains("elevation_deg")) {
            const auto [lo, hi] = read_range(s["elevation_deg"], w + ".sensing.elevation_deg");
            g.sensingElMin = rad(lo);
            g.sensingElMax = rad(hi);
        }
    }
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

template <class F>
json list_json(const std::vector<double>& v, F convert) {
    json a = json::array();
    for (double x : v) a.push_back(convert(x));
    return a;
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig cfg;
    if (j.is_null()) {
        cfg.normalize();
        return cfg;
    }
    const std::string w = "scenario";
    check_keys(j,
               {"M", "Nx", "Ny", "K", "sensing_az_points", "sensing_el_points", "p_max_dbm", "detector_power_dbm",
                "rcs", "gamma_s_db", "gamma_c_db", "noise_s_dbm", "noise_d_dbm", "noise_c_dbm", "rician_k_db",
                "pathloss_exp", "ref_gain_db", "wavelength_m", "t_s", "initial_reflect_ratio", "seed", "geometry"},
               w);
    read(j, "M", cfg.M, w);
    read(j, "Nx", cfg.Nx, w);
    read(j, "Ny", cfg.Ny, w);
    read(j, "K", cfg.K, w);
    read(j, "sensing_az_points", cfg.sensingAzPoints, w);
    read(j, "sensing_el_points", cfg.sensingElPoints, w);
    read_conv(j, "p_max_dbm", cfg.pMax, dbm_to_watts, w);
    read_conv(j, "detector_power_dbm", cfg.detectorPower, dbm_to_watts, w);
    read_conv(j, "noise_s_dbm", cfg.noiseS, dbm_to_watts, w);
    read_conv(j, "noise_d_dbm", cfg.noiseD, dbm_to_watts, w);
    read_conv(j, "rician_k_db", cfg.ricianK, db_to_linear, w);
    read_conv(j, "ref_gain_db", cfg.refGain, db_to_linear, w);
    read_list(j, "rcs", cfg.rcs, [](double x) { return x; }, w);
    read_list(j, "gamma_s_db", cfg.gammaS, db_to_linear, w);
    read_list(j, "gamma_c_db", cfg.gammaC, db_to_linear, w);
    read_list(j, "noise_c_dbm", cfg.noiseCbar, dbm_to_watts, w);
    read(j, "pathloss_exp", cfg.pathlossExp, w);
    read(j, "wavelength_m", cfg.wavelength, w);
    read(j, "t_s", cfg.tS, w);
    read(j, "initial_reflect_ratio", cfg.initialReflectRatio, w);
    read(j, "seed", cfg.seed, w);
    if (j.contains("geometry")) read_geometry(j["geometry"], cfg.geometry);
    cfg.normalize();
    cfg.validate();
    return cfg;
}

json scenario_to_json(const ScenarioConfig& cfgIn) {
    ScenarioConfig cfg = cfgIn;
    cfg.normalize();
    const Geometry& g = cfg.geometry;
    json j;
    j["M"] = cfg.M;
    j["Nx"] = cfg.Nx;
    j["Ny"] = cfg.Ny;
    j["K"] = cfg.K;
    j["sensing_az_points"] = cfg.sensingAzPoints;
    j["sensing_el_points"] = cfg.sensingElPoints;
    j["p_max_dbm"] = linear_to_db(cfg.pMax) + 30.0;
    j["detector_power_dbm"] = linear_to_db(cfg.detectorPower) + 30.0;
    j["rcs"] = cfg.rcs;
    j["gamma_s_db"] = list_json(cfg.gammaS, linear_to_db);
    j["gamma_c_db"] = list_json(cfg.gammaC, linear_to_db);
    j["noise_s_dbm"] = linear_to_db(cfg.noiseS) + 30.0;
    j["noise_d_dbm"] = linear_to_db(cfg.noiseD) + 30.0;
    j["noise_c_dbm"] = list_json(cfg.noiseCbar, [](double x) { return linear_to_db(x) + 30.0; });
    j["rician_k_db"] = linear_to_db(cfg.ricianK);
    j["pathloss_exp"] = cfg.pathlossExp;
    j["ref_gain_db"] = linear_to_db(cfg.refGain);
    j["wavelength_m"] = cfg.wavelength;
    j["t_s"] = cfg.tS;
    j["initial_reflect_ratio"] = cfg.initialReflectRatio;
    j["seed"] = cfg.seed;
    j["geometry"] = {
        {"bs", vec3_json(g.bs)},
        {"ris", vec3_json(g.ris)},
        {"user_box_min", vec3_json(g.userBoxMin)},
        {"user_box_max", vec3_json(g.userBoxMax)},
        {"detector",
         {{"azimuth_deg", deg(g.detector.azimuth)},
          {"elevation_deg", deg(g.detector.elevation)},
          {"range_m", g.detector.range}}},
        {"sensing",
         {{"range_m", g.sensingRange},
          {"azimuth_deg", json::array({deg(g.sensingAzMin), deg(g.sensingAzMax)})},
          {"elevation_deg", json::array({deg(g.sensingElMin), deg(g.sensingElMax)})}}},
    };
    return j;
}

AlgorithmSettings settings_from_json(const json& a, const json& s) {
    AlgorithmSettings st;
    if (!a.is_null()) {
        const std::string w = "algorithm";
        check_keys(a,
                   {"eps_converge", "eps_u", "eps_outer", "eps_penalty", "u_zero_thresh", "eps_feas", "init_margin",
                    "u_margin", "projection_tol", "monotone_tol", "repair_growth", "max_repair_steps",
                    "max_iter_inner", "max_iter_outer", "max_iter_u", "max_iter_init", "balance",
                    "keep_upper_norm_constraint"},
                   w);
        read(a, "eps_converge", st.epsConverge, w);
        read(a, "eps_u", st.epsU, w);
        read(a, "eps_outer", st.epsOuter, w);
        read(a, "eps_penalty", st.epsPenalty, w);
        read(a, "u_zero_thresh", st.uZeroThresh, w);
        read(a, "eps_feas", st.epsFeas, w);
        read(a, "init_margin", st.initMargin, w);
        read(a, "u_margin", st.uMargin, w);
        read(a, "projection_tol", st.projectionTol, w);
        read(a, "monotone_tol", st.monotoneTol, w);
        read(a, "repair_growth", st.repairGrowth, w);
        read(a, "max_repair_steps", st.maxRepairSteps, w);
        read(a, "max_iter_inner", st.maxIterInner, w);
        read(a, "max_iter_outer", st.maxIterOuter, w);
        read(a, "max_iter_u", st.maxIterU, w);
        read(a, "max_iter_init", st.maxIterInit, w);
        read(a, "balance", st.balance, w);
        read(a, "keep_upper_norm_constraint", st.keepUpperNormConstraint, w);
    }
    if (!s.is_null()) {
        const std::string w = "solver";
        check_keys(s, {"tol", "reduced_tol", "revalidate_tol", "max_iter"}, w);
        read(s, "tol", st.solver.tol, w);
        read(s, "reduced_tol", st.solver.reducedTol, w);
        read(s, "revalidate_tol", st.solver.revalidateTol, w);
        read(s, "max_iter", st.solver.maxIter, w);
    }
    st.validate();
    return st;
}

json settings_to_json(const AlgorithmSettings& st) {
    return {
        {"eps_converge", st.epsConverge},
        {"eps_u", st.epsU},
        {"eps_outer", st.epsOuter},
        {"eps_penalty", st.epsPenalty},
        {"u_zero_thresh", st.uZeroThresh},
        {"eps_feas", st.epsFeas},
        {"init_margin", st.initMargin},
        {"u_margin", st.uMargin},
        {"projection_tol", st.projectionTol},
        {"monotone_tol", st.monotoneTol},
        {"repair_growth", st.repairGrowth},
        {"max_repair_steps", st.maxRepairSteps},
        {"max_iter_inner", st.maxIterInner},
        {"max_iter_outer", st.maxIterOuter},
        {"max_iter_u", st.maxIterU},
        {"max_iter_init", st.maxIterInit},
        {"balance", st.balance},
        {"keep_upper_norm_constraint", st.keepUpperNormConstraint},
    };
}

json solver_to_json(const SolverSettings& s) {
    return {{"tol", s.tol}, {"reduced_tol", s.reducedTol}, {"revalidate_tol", s.revalidateTol}, {"max_iter", s.maxIter}};
}

ExperimentSpec experiment_from_json(const json& root) {
    check_keys(root, {"scenario", "algorithm", "solver", "experiment"}, "config");
    ExperimentSpec spec;
    spec.scenario = scenario_from_json(root.value("scenario", json()));
    spec.settings = settings_from_json(root.value("algorithm", json()), root.value("solver", json()));
    if (root.contains("experiment")) {
        const json& e = root["experiment"];
        const std::string w = "experiment";
        check_keys(e, {"realizations", "modes", "sweep", "heatmap"}, w);
        read(e, "realizations", spec.realizations, w);
        if (e.contains("modes")) {
            require(e["modes"].is_array(), "experiment.modes: expected an array");
            spec.modes.clear();
            for (const auto& m : e["modes"]) {
                ModeSpec ms;
                if (m.is_string()) {
                    ms.mode = parse_mode(m.get<std::string>());
                } else {
                    check_keys(m, {"mode", "reflect_ratio", "label"}, w + ".modes[]");
                    std::string name;
                    read(m, "mode", name, w + ".modes[]");
                    ms.mode = parse_mode(name);
                    if (m.contains("reflect_ratio")) ms.reflectRatio = m["reflect_ratio"].get<double>();
                    read(m, "label", ms.label, w + ".modes[]");
                }
                spec.modes.push_back(ms);
            }
        }
        if (e.contains("sweep")) {
            const json& s = e["sweep"];
            check_keys(s, {"param", "values"}, w + ".sweep");
            std::string p;
            read(s, "param", p, w + ".sweep");
            spec.sweepParam = parse_sweep_param(p);
            read(s, "values", spec.sweepValues, w + ".sweep");
        }
        if (e.contains("heatmap")) {
            const json& h = e["heatmap"];
            check_keys(h, {"az_points", "el_points"}, w + ".heatmap");
            read(h, "az_points", spec.heatmap.azPoints, w + ".heatmap");
            read(h, "el_points", spec.heatmap.elPoints, w + ".heatmap");
        }
    }
    spec.validate();
    return spec;
}

json experiment_to_json(const ExperimentSpec& spec) {
    json modes = json::array();
    for (const auto& m : spec.modes) {
        json jm = {{"mode", to_string(m.mode)}, {"label", m.name()}};
        if (m.reflectRatio) jm["reflect_ratio"] = *m.reflectRatio;
        modes.push_back(jm);
    }
    json exp = {{"realizations", spec.realizations},
                {"modes", modes},
                {"heatmap", {{"az_points", spec.heatmap.azPoints}, {"el_points", spec.heatmap.elPoints}}}};
    if (spec.sweepParam != SweepParam::None) {
        exp["sweep"] = {{"param", to_string(spec.sweepParam)}, {"values", spec.sweepValues}};
    }
    return {{"scenario", scenario_to_json(spec.scenario)},
            {"algorithm", settings_to_json(spec.settings)},
            {"solver", solver_to_json(spec.settings.solver)},
            {"experiment", exp}};
}

ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config '" + path + "'");
    json root;
    try {
        root = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw InvalidArgument("config '" + path + "': " + e.what());
    }
    return experiment_from_json(root);
}

}  // namespace risobf
