// SPDX-License-Identifier: Apache-2.0
//
// SCA bounds on |a^H Phi G_r W|^2 style quantities, written over the stacked
// variable psi = [vec(W); conj(diag Phi)], plus the combiner linearizations
// and the unit-modulus penalty.
#pragma once

#include "risobf/metrics.hpp"

#include <array>

namespace risobf {

struct PsiLayout {
    int M = 0;
    int K = 0;
    int Nr = 0;
    int size() const { return M * K + Nr; }
    int phiOffset() const { return M * K; }
};

CVec stack_psi(const CMat& W, const CVec& phi);
/// Inverse of stack_psi; the Phi block is conjugated back.
std::pair<CMat, CVec> unstack_psi(const CVec& psi, int M, int K);

/// f(psi) = sign * ||Q psi||^2 + Re{lin^H psi} + constant.
struct QuadraticForm {
    CMat Q;
    CVec lin;
    double constant = 0.0;
    double sign = 1.0;
    double value(const CVec& psi) const;
};

/// Concave minorant -1/2 ||Xi1 psi||^2 + Re{l^H psi} + const, with
/// l = Xi2^H Xi2 psi0 and const = -1/2 ||Xi2 psi0||^2 - ||Xi3 psi0||^2.
struct MinorantData {
    CMat Xi1;
    CMat Xi2;
    CVec lin;
    double constant = 0.0;
    double scale = 1.0;  // block balance s: Xi = [C/s, -/+ s B]
    double value(const CVec& psi) const;
    QuadraticForm form() const;
};

/// Four convex constraints slack >= Lambda(dir, psi, psi0), dir in
/// {a, -a, ja, -ja}. Entries 0,1 bind rho and entries 2,3 bind zeta.
struct MajorantData {
    int k = 0;
    std::array<QuadraticForm, 4> lambda;
    static constexpr std::array<int, 4> slackOf{0, 0, 1, 1};
    double scale = 1.0;
    /// Smallest (rho, zeta) satisfying all four constraints at psi.
    std::pair<double, double> minimalSlacks(const CVec& psi) const;
};

/// With balance=true the two psi blocks are rescaled so their contributions
/// match at psi0; balance=false gives the unscaled form (s = 1).
MinorantData lemma1_minorant(const CVec& a, const CVec& psi0, const PsiLayout& layout, const CMat& Gr,
                             bool balance = true);
MinorantData corollary2_minorant(const CVec& a, int k, const CVec& psi0, const PsiLayout& layout, const CMat& Gr,
                                 bool balance = true);
MajorantData lemma3_majorant(const CVec& a, int k, const CVec& psi0, const PsiLayout& layout, const CMat& Gr,
                             bool balance = true);

/// ||a^H Phi G_r W||^2 and |a^H Phi G_r w_k|^2 evaluated directly from psi.
double true_quadratic(const CVec& a, const CVec& psi, const PsiLayout& layout, const CMat& Gr);
cplx true_entry(const CVec& a, int k, const CVec& psi, const PsiLayout& layout, const CMat& Gr);

/// Linearized sensing constraint in u:
///   Re{g^H u} - |c_a^H uPrev|^2 >= gammaOverS * (rho^2 |e_a^H u|^2 + noise * normSq)
/// where normSq is 1 in the literal form and ||u||^2 in the scale-invariant
/// form used inside the u-program.
struct USensingLinearization {
    CVec g;
    double offset = 0.0;  // |c_a^H uPrev|^2
    double gammaOverS = 0.0;
    CVec ea;
    double rho2 = 0.0;
    double noise = 0.0;
    double lhs(const CVec& u) const;
    double rhs(const CVec& u, bool scaleInvariantNoise = false) const;
};

USensingLinearization u_sensing_linearization(int l, const CVec& uPrev, const PartitionedChannels& ch,
                                              const ScenarioConfig& cfg, const BeamformingState& state);

/// Re{g^H u} >= rhs, the linearized lower bound ||u||^2 >= 1.
struct UnitNormLinearization {
    CVec g;
    double rhs = 1.0;
    double lhs(const CVec& u) const { return g.dot(u).real(); }
};
UnitNormLinearization unit_norm_linearization(const CVec& uPrev);

/// Linear coefficient of Hbar(psi, psiPrev) = Re{psiPrev_Phi^H psi_Phi}.
CVec penalty_linearization(const CVec& psiPrev, const PsiLayout& layout);

}  // namespace risobf
