// SPDX-License-Identifier: Apache-2.0
//
// JSON configuration. Top-level sections: "scenario" (with a nested
// "geometry"), "algorithm", "solver", "experiment". Every key is optional;
// unknown keys are rejected. Powers are given in dBm, gains and thresholds
// in dB, angles in degrees.
#pragma once

#include "risobf/harness.hpp"

#include "json.hpp"

#include <string>

namespace risobf {

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

AlgorithmSettings settings_from_json(const nlohmann::json& algorithm, const nlohmann::json& solver);
nlohmann::json settings_to_json(const AlgorithmSettings& st);
nlohmann::json solver_to_json(const SolverSettings& s);

ExperimentSpec experiment_from_json(const nlohmann::json& root);
/// Fully resolved document. Reading it back reproduces the experiment up to
/// the rounding of the dB conversions.
nlohmann::json experiment_to_json(const ExperimentSpec& spec);

ExperimentSpec load_experiment(const std::string& path);

}  // namespace risobf
