// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo campaigns, sweeps, heatmaps and the detection oracle. Every
// kernel has a serial reference and an OpenMP version that produce the same
// numbers.
#pragma once

#include "risobf/algorithms.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace risobf {

struct ModeSpec {
    Mode mode = Mode::ProposedAdaptive;
    std::optional<double> reflectRatio;  // initial / fixed partition; scenario default when empty
    std::string label;                   // defaults to the mode name

    std::string name() const;
};

enum class SweepParam { None, PMaxDbm, GammaCDb, GammaSDb, N };
const char* to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string& s);

struct HeatmapGrid {
    int azPoints = 21;
    int elPoints = 21;
};

struct ExperimentSpec {
    ScenarioConfig scenario;
    AlgorithmSettings settings;
    std::vector<ModeSpec> modes{ModeSpec{}};
    int realizations = 1;
    SweepParam sweepParam = SweepParam::None;
    std::vector<double> sweepValues;  // dBm for P_max, dB for the thresholds, element count for N
    HeatmapGrid heatmap;

    void validate() const;
};

/// Scenario for one sweep value (identity for SweepParam::None).
ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepParam p, double value);

/// Seed of realization i: base seed + i.
std::uint64_t realization_seed(const ScenarioConfig& cfg, int i);

struct RealizationOutcome {
    std::uint64_t seed = 0;
    bool feasible = false;  // initialization succeeded and the run finished
    bool converged = false;
    bool constraintsOk = false;
    double maxDetectorSinrDb = 0.0;
    double interference = 0.0;
    int nr = 0;
    int outerIterations = 0;
    std::string error;
};

struct PointAggregate {
    double sweepValue = 0.0;
    std::string label;
    Mode mode = Mode::ProposedAdaptive;
    int realizations = 0;
    int feasible = 0;
    int converged = 0;
    double meanDetectorSinrDb = 0.0;  // over feasible realizations
    double ci95Db = 0.0;              // normal-approximation half width
    double meanInterference = 0.0;
    double meanNr = 0.0;
    std::vector<RealizationOutcome> runs;  // in realization order
};

struct AggregateResult {
    SweepParam sweepParam = SweepParam::None;
    std::vector<PointAggregate> points;  // sweep value major, mode minor

    const PointAggregate& at(double sweepValue, const std::string& label) const;
};

/// All modes of one realization on the same channel draw.
std::vector<RealizationOutcome> run_realization(const ScenarioConfig& cfg, const AlgorithmSettings& st,
                                                const std::vector<ModeSpec>& modes);

AggregateResult run_experiment_serial(const ExperimentSpec& spec);
AggregateResult run_experiment(const ExperimentSpec& spec);  // OpenMP over (sweep value, realization)

/// Same as run_experiment; the sweep must be set.
AggregateResult sweep(const ExperimentSpec& spec);

struct HeatmapResult {
    std::vector<double> azimuthDeg;
    std::vector<double> elevationDeg;
    RMat gammaD;  // el x az, linear
    RMat fa;      // averaged false-alarm probability
    RMat md;      // averaged missed-detection probability
};

/// Detector-side FA/MD maps over the sensing rectangle at the configured
/// range for the given converged state.
HeatmapResult heatmap_serial(const BeamformingState& s, const ChannelSet& full, const ElementPartition& part,
                             const ScenarioConfig& cfg, const HeatmapGrid& grid, int tS);
HeatmapResult heatmap(const BeamformingState& s, const ChannelSet& full, const ElementPartition& part,
                      const ScenarioConfig& cfg, const HeatmapGrid& grid, int tS);

struct OracleResult {
    long long trials = 0;
    double pHat = 0.0;
    double qHat = 0.0;
    double pSigma = 0.0;  // binomial standard deviation of the estimate
    double qSigma = 0.0;
};

/// Monte Carlo energy detector: tS exponential samples with mean omega0
/// (target absent) or omega1 (present) are averaged and compared with
/// threshold. Trials are split in fixed blocks with their own streams.
OracleResult detection_oracle_serial(double omega0, double omega1, double threshold, int tS, long long trials,
                                     std::uint64_t seed);
OracleResult detection_oracle(double omega0, double omega1, double threshold, int tS, long long trials,
                              std::uint64_t seed);

/// Columns: sweep_param,sweep_value,label,mode,realizations,feasible,converged,
/// mean_max_det_sinr_db,ci95_db,mean_interference,mean_nr
void write_aggregate_csv(const AggregateResult& r, std::ostream& os);
/// Matrix layout: header "elevation_deg\azimuth_deg,<az...>", one row per elevation.
void write_heatmap_csv(const HeatmapResult& h, const RMat& values, std::ostream& os);

}  // namespace risobf
