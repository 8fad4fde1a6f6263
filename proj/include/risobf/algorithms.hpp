// SPDX-License-Identifier: Apache-2.0
//
// Alternating optimization: psi-SCA, combiner SCA with element
// reassignment, two-step initialization and the outer loop.
#pragma once

#include "risobf/subproblems.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace risobf {

struct AlgorithmSettings {
    double epsConverge = 1e-4;   // ||psi - psiPrev||^2 in the psi-SCA
    double epsU = 1e-6;          // ||u - uPrev||^2 in the combiner SCA
    double epsOuter = 1e-3;      // relative interference gain between outer iterations
    double epsPenalty = 1e-3;    // unit-modulus penalty weight (relative to the objective scale)
    double uZeroThresh = 1e-3;   // |u_i| <= uZeroThresh * max|u| marks element i for reassignment
    double epsFeas = 1e-6;       // sum of normalized slacks accepted as zero
    double initMargin = 1e-3;    // initialization targets thresholds scaled by (1 + margin)
    double uMargin = 1e-3;       // same for the sensing thresholds inside the combiner program
    double projectionTol = 1e-4; // relative constraint break allowed by the unit-modulus projection
    double monotoneTol = 1e-6;   // relative drop tolerated before the penalty-free re-solve
    double repairGrowth = 10.0;  // penalty growth per repair pass when the projection is rejected
    int maxRepairSteps = 5;
    int maxIterInner = 50;
    int maxIterOuter = 5;
    int maxIterU = 30;
    int maxIterInit = 30;
    bool balance = true;
    bool keepUpperNormConstraint = false;
    SolverSettings solver;

    void validate() const;
};

enum class Mode { ProposedAdaptive, ProposedFixed, BaselineSenseMax };
const char* to_string(Mode m);
Mode parse_mode(const std::string& s);

struct TraceRecord {
    int outer = 0;
    std::string stage;  // init, psi, project, u, reassign
    int iter = 0;
    double interference = 0.0;
    double maxDetectorSinrDb = 0.0;
    int nr = 0;
    double minSensingRatioDb = 0.0;  // min_l SINR_l / Gamma_s,l
    double minCommRatioDb = 0.0;     // min_k SINR_k / Gamma_c,k
    double powerRatio = 0.0;         // ||W||_F^2 / P_max
    double maxModulusDev = 0.0;
    double objective = 0.0;
    double delta = 0.0;
    std::string status;
};

struct RunTrace {
    std::vector<TraceRecord> records;
    std::vector<double> wallSeconds;  // aligned with records; kept out of the CSV
    std::vector<int> nrHistory;       // N_r after every combiner/partition step
    bool degraded = false;
    std::vector<std::string> notes;
};

/// Independent audit of the true constraints.
struct FeasibilityReport {
    double minSensingRatio = 0.0;
    double minCommRatio = 0.0;
    double powerRatio = 0.0;
    double maxModulusDev = 0.0;
    double uNormDev = 0.0;
    bool sinrOk(double relTol) const { return minSensingRatio >= 1.0 - relTol && minCommRatio >= 1.0 - relTol; }
    bool ok(double sinrTol = 1e-6, double modulusTol = 1e-3, double normTol = 1e-6) const;
};
FeasibilityReport audit(const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg);

CVec project_unit_modulus(const CVec& phi);

/// Zero-forcing beams scaled to the power budget (matched filter when K > M).
CMat zero_forcing_beams(const PartitionedChannels& ch, const CVec& phi, double pMax);

/// Combiner maximizing min_l SINR_l / Gamma_s,l at fixed (W, Phi).
CVec max_min_combiner(const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg,
                      int iterations = 30);

struct PsiOutcome {
    BeamformingState state;
    int iterations = 0;
    bool converged = false;
    bool degraded = false;
    bool projected = false;
    std::vector<double> acceptedInterference;
};

/// Alternating psi loop. senseMax switches the objective to the sensing baseline.
PsiOutcome optimize_psi(const BeamformingState& start, const PartitionedChannels& ch, const ScenarioConfig& cfg,
                        const AlgorithmSettings& st, RunTrace& trace, int outer = 0, bool senseMax = false);

struct UOutcome {
    BeamformingState state;
    ElementPartition partition;
    PartitionedChannels channels;
    bool changed = false;
    bool infeasible = false;
    std::vector<int> reassigned;
};

/// Combiner update with element reassignment. With reassign = false the partition is kept.
UOutcome optimize_u_and_partition(const BeamformingState& start, const ChannelSet& full,
                                  const ElementPartition& partition, const ScenarioConfig& cfg,
                                  const AlgorithmSettings& st, RunTrace& trace, int outer = 0, bool reassign = true);

/// Surface indices of the absorptive elements with |u_i| <= relThresh * max|u|.
std::vector<int> elements_to_reassign(const CVec& u, const ElementPartition& partition, double relThresh);

/// Adds the zero-magnitude reflection coefficients and drops the combiner
/// entries of the given elements (indices into the whole surface).
BeamformingState reassign_elements(const BeamformingState& s, const ElementPartition& oldPart,
                                   const ElementPartition& newPart);

struct InitOutcome {
    BeamformingState state;
    ElementPartition partition;
    bool feasible = false;
    double sumSlack = 0.0;
    int iterations = 0;
};

InitOutcome find_initial_point(const ChannelSet& full, const ElementPartition& partition, const ScenarioConfig& cfg,
                               const AlgorithmSettings& st, RunTrace& trace);

struct RunResult {
    Scenario scenario;
    BeamformingState state;
    ElementPartition partition;
    RunTrace trace;
    bool initFeasible = false;
    bool converged = false;
    int outerIterations = 0;
    FeasibilityReport report;
    double maxDetectorSinr = 0.0;
    double interference = 0.0;
};

/// Outer loop (or one of the comparison modes) on the realization drawn
/// from cfg.seed.
RunResult run_main(const ScenarioConfig& cfg, const AlgorithmSettings& st, Mode mode = Mode::ProposedAdaptive);
RunResult run_on_scenario(const Scenario& sc, const ScenarioConfig& cfg, const AlgorithmSettings& st, Mode mode);

/// Columns: outer,stage,iter,interference,max_det_sinr_db,nr,min_sensing_ratio_db,
/// min_comm_ratio_db,power_ratio,max_modulus_dev,objective,delta,status
void write_trace_csv(const RunTrace& trace, std::ostream& os);
void write_timing_csv(const RunTrace& trace, std::ostream& os);

}  // namespace risobf
