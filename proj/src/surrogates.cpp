// SPDX-License-Identifier: Apache-2.0
#include "risobf/surrogates.hpp"

#include <cmath>

namespace risobf {

namespace {

void check_layout(const CVec& a, const CVec& psi0, const PsiLayout& layout, const CMat& Gr) {
    require(a.size() == layout.Nr, "surrogate: a must have N_r entries");
    require(psi0.size() == layout.size(), "surrogate: psi length must be MK + N_r");
    require(Gr.rows() == layout.Nr && Gr.cols() == layout.M, "surrogate: G_r must be N_r x M");
    require(psi0.allFinite(), "surrogate: psi0 must be finite");
}

double balance_scale(double num, double den) {
    if (!(num > 0.0) || !(den > 0.0)) return 1.0;
    return std::sqrt(num / den);
}

// Xi = [C/s, sign * s * B] acting on psi.
CMat split_block(const CMat& C, const CMat& B, double s, double sign) {
    CMat X(C.rows(), C.cols() + B.cols());
    X.leftCols(C.cols()) = C / s;
    X.rightCols(B.cols()) = (sign * s) * B;
    return X;
}

MinorantData make_minorant(const CMat& C, const CMat& B, const CVec& psi0, double s, double tail) {
    MinorantData m;
    m.scale = s;
    m.Xi1 = split_block(C, B, s, -1.0);
    m.Xi2 = split_block(C, B, s, 1.0);
    const CVec x2 = m.Xi2 * psi0;
    m.lin = m.Xi2.adjoint() * x2;
    m.constant = -0.5 * x2.squaredNorm() - tail;
    return m;
}

}  // namespace

CVec stack_psi(const CMat& W, const CVec& phi) {
    CVec psi(W.size() + phi.size());
    psi.head(W.size()) = Eigen::Map<const CVec>(W.data(), W.size());
    psi.tail(phi.size()) = phi.conjugate();
    return psi;
}

std::pair<CMat, CVec> unstack_psi(const CVec& psi, int M, int K) {
    require(M >= 1 && K >= 1 && psi.size() >= M * K, "unstack_psi: length mismatch");
    CMat W = Eigen::Map<const CMat>(psi.data(), M, K);
    CVec phi = psi.tail(psi.size() - M * K).conjugate();
    return {W, phi};
}

double QuadraticForm::value(const CVec& psi) const {
    return sign * (Q * psi).squaredNorm() + lin.dot(psi).real() + constant;
}

double MinorantData::value(const CVec& psi) const {
    return -0.5 * (Xi1 * psi).squaredNorm() + lin.dot(psi).real() + constant;
}

QuadraticForm MinorantData::form() const {
    QuadraticForm f;
    f.Q = Xi1 / std::sqrt(2.0);
    f.lin = lin;
    f.constant = constant;
    f.sign = -1.0;
    return f;
}

std::pair<double, double> MajorantData::minimalSlacks(const CVec& psi) const {
    const double rho = std::max(lambda[0].value(psi), lambda[1].value(psi));
    const double zeta = std::max(lambda[2].value(psi), lambda[3].value(psi));
    return {rho, zeta};
}

double true_quadratic(const CVec& a, const CVec& psi, const PsiLayout& layout, const CMat& Gr) {
    auto [W, phi] = unstack_psi(psi, layout.M, layout.K);
    const CVec v = a.conjugate().cwiseProduct(phi);
    return (v.transpose() * Gr * W).squaredNorm();
}

cplx true_entry(const CVec& a, int k, const CVec& psi, const PsiLayout& layout, const CMat& Gr) {
    require(k >= 0 && k < layout.K, "true_entry: k out of range");
    auto [W, phi] = unstack_psi(psi, layout.M, layout.K);
    const CVec v = a.conjugate().cwiseProduct(phi);
    return (v.transpose() * Gr * W.col(k))(0);
}

MinorantData lemma1_minorant(const CVec& a, const CVec& psi0, const PsiLayout& layout, const CMat& Gr,
                             bool balance) {
    check_layout(a, psi0, layout, Gr);
    const int M = layout.M, K = layout.K;
    auto [W0, phi0] = unstack_psi(psi0, M, K);
    const CMat B = Gr.adjoint() * a.asDiagonal();
    const CVec b0 = B * psi0.tail(layout.Nr);
    const CVec c = W0.adjoint() * b0;
    // (c^T kron I_M) vec(W) = W c
    CMat C = CMat::Zero(M, M * K);
    for (int k = 0; k < K; ++k) C.block(0, M * k, M, M) = c(k) * CMat::Identity(M, M);
    const double s = balance ? balance_scale((W0 * c).norm(), b0.norm()) : 1.0;
    return make_minorant(C, B, psi0, s, c.squaredNorm());
}

MinorantData corollary2_minorant(const CVec& a, int k, const CVec& psi0, const PsiLayout& layout, const CMat& Gr,
                                 bool balance) {
    check_layout(a, psi0, layout, Gr);
    require(k >= 0 && k < layout.K, "corollary2_minorant: k out of range");
    const int M = layout.M;
    auto [W0, phi0] = unstack_psi(psi0, M, layout.K);
    const CMat B = Gr.adjoint() * a.asDiagonal();
    const CVec b0 = B * psi0.tail(layout.Nr);
    const cplx ck = W0.col(k).dot(b0);
    // c_k (delta_k^T kron I_M) vec(W) = c_k w_k
    CMat C = CMat::Zero(M, M * layout.K);
    C.block(0, M * k, M, M) = ck * CMat::Identity(M, M);
    const double s = balance ? balance_scale(std::abs(ck) * W0.col(k).norm(), b0.norm()) : 1.0;
    return make_minorant(C, B, psi0, s, std::norm(ck));
}

MajorantData lemma3_majorant(const CVec& a, int k, const CVec& psi0, const PsiLayout& layout, const CMat& Gr,
                             bool balance) {
    check_layout(a, psi0, layout, Gr);
    require(k >= 0 && k < layout.K, "lemma3_majorant: k out of range");
    const int M = layout.M, Nr = layout.Nr;
    auto [W0, phi0] = unstack_psi(psi0, M, layout.K);

    MajorantData out;
    out.k = k;
    const double s =
        balance ? balance_scale(psi0.tail(Nr).norm(), a.conjugate().cwiseProduct(Gr * W0.col(k)).norm()) : 1.0;
    out.scale = s;

    // Pi(dir) = [s * (delta_k^T kron diag(dir)^* G_r), I / s]
    auto pi = [&](const CVec& dir) {
        CMat P = CMat::Zero(Nr, layout.size());
        P.block(0, M * k, Nr, M) = s * (dir.conjugate().asDiagonal() * Gr);
        P.rightCols(Nr) = CMat::Identity(Nr, Nr) / s;
        return P;
    };
    const cplx j(0.0, 1.0);
    const std::array<CVec, 4> dirs{a, CVec(-a), CVec(j * a), CVec(-j * a)};
    for (std::size_t i = 0; i < 4; ++i) {
        const CMat Pp = pi(dirs[i]);
        const CMat Pm = pi(-dirs[i]);
        const CVec pm0 = Pm * psi0;
        QuadraticForm& q = out.lambda[i];
        q.Q = 0.5 * Pp;
        q.lin = -0.5 * (Pm.adjoint() * pm0);
        q.constant = 0.25 * pm0.squaredNorm();
        q.sign = 1.0;
    }
    return out;
}

double USensingLinearization::lhs(const CVec& u) const { return g.dot(u).real() - offset; }

double USensingLinearization::rhs(const CVec& u, bool scaleInvariantNoise) const {
    const double n2 = scaleInvariantNoise ? u.squaredNorm() : 1.0;
    return gammaOverS * (rho2 * std::norm(ea.dot(u)) + noise * n2);
}

USensingLinearization u_sensing_linearization(int l, const CVec& uPrev, const PartitionedChannels& ch,
                                              const ScenarioConfig& cfg, const BeamformingState& state) {
    require(l >= 0 && l < static_cast<int>(ch.ca.size()), "u_sensing_linearization: l out of range");
    require(uPrev.size() == ch.ea.size(), "u_sensing_linearization: uPrev length must equal N_a");
    require(uPrev.norm() > 0.0, "u_sensing_linearization: uPrev must be nonzero");
    const auto ul = static_cast<std::size_t>(l);
    const CVec& ca = ch.ca[ul];
    const double rcs = cfg.rcs[ul];
    const double f = effective_row(ch.cr[ul], state, ch).squaredNorm();
    const double S = rcs * f + rcs * cfg.detectorPower * std::norm(ch.d(l));
    require(S > 0.0, "u_sensing_linearization: no signal energy reaches the location");

    USensingLinearization lin;
    const cplx cu = ca.dot(uPrev);  // c_a^H uPrev
    lin.g = 2.0 * cu * ca;
    lin.offset = std::norm(cu);
    lin.gammaOverS = cfg.gammaS[ul] / S;
    lin.ea = ch.ea;
    lin.rho2 = cfg.detectorPower;
    lin.noise = cfg.noiseS;
    return lin;
}

UnitNormLinearization unit_norm_linearization(const CVec& uPrev) {
    require(uPrev.norm() > 0.0, "unit_norm_linearization: expansion point is zero, the constraint is infeasible");
    UnitNormLinearization lin;
    lin.g = 2.0 * uPrev;
    lin.rhs = 1.0 + uPrev.squaredNorm();
    return lin;
}

CVec penalty_linearization(const CVec& psiPrev, const PsiLayout& layout) {
    require(psiPrev.size() == layout.size(), "penalty_linearization: length mismatch");
    CVec lin = CVec::Zero(layout.size());
    lin.tail(layout.Nr) = psiPrev.tail(layout.Nr);
    return lin;
}

}  // namespace risobf
