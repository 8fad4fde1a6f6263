// SPDX-License-Identifier: Apache-2.0
//
// Assembly of the convex programs solved inside the alternating loop:
//   - the psi program (beamformer + reflection coefficients),
//   - the sparse combiner program,
//   - the slack-augmented feasibility program used for initialization,
//   - the sensing-maximization baseline.
#pragma once

#include "risobf/socp_solver.hpp"
#include "risobf/surrogates.hpp"

#include <vector>

namespace risobf {

struct AssemblyOptions {
    double epsPenalty = 1e-3;  // relative to the objective scale
    bool balance = true;       // block balancing inside the bounds
};

/// A psi-type program plus what is needed to map its solution back.
struct PsiProgram {
    ConicProblem problem;
    PsiLayout layout;
    double wScale = 1.0;     // stored W = W / wScale
    double slackScale = 1.0; // stored delta/chi = delta / slackScale
    double objScale = 1.0;   // objective normalization
    int offW = 0;
    int offPhi = 0;
    std::vector<double> gammaBar;   // per location, after the combiner is fixed
    std::vector<bool> sensingActive;
    int numEpigraph = 0;

    /// W and phi read from a solution; u is copied from the expansion point.
    BeamformingState extract(const SolveResult& r, const BeamformingState& prev) const;
};

/// Effective sensing threshold on ||c_r^H Phi G_r W||^2 for location l with
/// the combiner held fixed. Throws when u^H c_a = 0.
double sensing_gamma_bar(int l, const CVec& u, const PartitionedChannels& ch, const ScenarioConfig& cfg);

/// Maximize the interference minorant at psiPrev plus the unit-modulus
/// penalty under the power, sensing, communication and relaxed modulus
/// constraints.
PsiProgram assemble_psi_socp(const PartitionedChannels& ch, const BeamformingState& prev, const ScenarioConfig& cfg,
                             const AssemblyOptions& opt = {});

/// Same constraints; maximizes sum_l w_l Omega(c_r,l) with
/// w_l = rcs_l |u^H c_a,l|^2 / omega0 (no detector objective).
PsiProgram assemble_sense_max(const PartitionedChannels& ch, const BeamformingState& prev, const ScenarioConfig& cfg,
                              const AssemblyOptions& opt = {});

/// Minimizes the normalized slacks sum(lambda_s) + sum(lambda_c). The
/// stored slacks are lambda_s / (Gamma_s omega0) and lambda_c / (Gamma_c sigma^2).
PsiProgram assemble_init_problem(const PartitionedChannels& ch, const BeamformingState& prev,
                                 const ScenarioConfig& cfg, const AssemblyOptions& opt = {});

struct UProgram {
    ConicProblem problem;
    int offU = 0;
    int na = 0;
    CVec extract(const SolveResult& r) const;
};

/// min ||u||_1 under the linearized sensing constraints and the linearized
/// lower norm bound. keepUpperNorm adds ||u||^2 <= 1, which makes uPrev the
/// only feasible point when ||uPrev|| = 1.
UProgram assemble_u_l1(const PartitionedChannels& ch, const BeamformingState& state, const CVec& uPrev,
                       const ScenarioConfig& cfg, bool keepUpperNorm = false);

}  // namespace risobf
