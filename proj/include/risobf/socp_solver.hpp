// SPDX-License-Identifier: Apache-2.0
//
// Dense primal-dual interior-point method (homogeneous self-dual embedding,
// Nesterov-Todd scaling, Mehrotra predictor-corrector) for ConicProblem.
#pragma once

#include "risobf/conic.hpp"

#include <string>

namespace risobf {

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolverSettings {
    double tol = 1e-8;
    double reducedTol = 1e-6;      // accepted when the iteration stalls
    double revalidateTol = 1e-6;   // absolute, on the problem's rows
    int maxIter = 100;
};

struct SolveResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    RVec x;
    double objective = 0.0;  // in the maximize sense, including the offset
    int iterations = 0;
    double primalResidual = 0.0;
    double dualResidual = 0.0;
    double gap = 0.0;
    double maxViolation = 0.0;
    bool reducedAccuracy = false;
    std::string message;

    bool ok() const { return status == SolveStatus::Optimal; }
    /// Values of a named variable block (in stored units).
    RVec block(const ConicProblem& p, const std::string& name) const;
};

/// Solves the problem and re-checks the returned point against every row of
/// the problem; a point that fails the check is reported as a numerical
/// failure.
SolveResult solve(const ConicProblem& problem, const SolverSettings& settings = {});

}  // namespace risobf
