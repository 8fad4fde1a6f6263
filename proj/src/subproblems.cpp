// SPDX-License-Identifier: Apache-2.0
#include "risobf/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace risobf {

namespace {

enum class Goal { Protect, SenseMax, Feasibility };

int pair_index(int k, int i, int K) { return k * (K - 1) + (i < k ? i : i - 1); }

class PsiBuilder {
  public:
    PsiBuilder(const PartitionedChannels& ch, const BeamformingState& prev, const ScenarioConfig& cfg,
               const AssemblyOptions& opt)
        : ch_(ch), prev_(prev), cfg_(cfg), opt_(opt) {
        require(prev.W.rows() == ch.Gr.cols() && prev.phi.size() == ch.Gr.rows(), "psi program: state dims mismatch");
        require(static_cast<int>(ch.hr.size()) == prev.W.cols(), "psi program: K mismatch");
        P_.layout = {static_cast<int>(prev.W.rows()), static_cast<int>(prev.W.cols()), static_cast<int>(prev.phi.size())};
        psi0_ = stack_psi(prev.W, prev.phi);
        P_.wScale = std::sqrt(cfg.pMax);
    }

    PsiProgram build(Goal goal) {
        const PsiLayout& L = P_.layout;
        const int K = L.K;
        ConicProblem& p = P_.problem;
        P_.offW = p.addBlock("W", L.M * K, true, P_.wScale);
        P_.offPhi = p.addBlock("phi", L.Nr, true, 1.0);

        // Expected slack magnitude at the expansion point.
        double sl = 0.0;
        for (int k = 0; k < K; ++k) {
            sl = std::max(sl, std::sqrt(cfg_.noiseCbar[static_cast<std::size_t>(k)]));
            for (int i = 0; i < K; ++i) {
                sl = std::max(sl, std::abs(true_entry(ch_.hr[static_cast<std::size_t>(k)].conjugate(), i, psi0_, L,
                                                      ch_.Gr)));
            }
        }
        P_.slackScale = sl;

        const int nl = static_cast<int>(ch_.cr.size());
        if (goal == Goal::Protect) offT_ = p.addBlock("t", 1);
        if (goal == Goal::SenseMax) offT_ = p.addBlock("t", nl);
        P_.numEpigraph = goal == Goal::Protect ? 1 : (goal == Goal::SenseMax ? nl : 0);
        if (K > 1) {
            offDelta_ = p.addBlock("delta", K * (K - 1), false, sl);
            offChi_ = p.addBlock("chi", K * (K - 1), false, sl);
        }
        if (goal == Goal::Feasibility) {
            offLs_ = p.addBlock("lambda_s", nl);
            offLc_ = p.addBlock("lambda_c", K);
        }

        add_power();
        add_modulus();
        add_sensing(goal == Goal::Feasibility);
        add_comm(goal == Goal::Feasibility);

        const CVec lp = penalty_linearization(psi0_, L);
        switch (goal) {
            case Goal::Protect: add_protect_objective(lp); break;
            case Goal::SenseMax: add_sense_objective(lp); break;
            case Goal::Feasibility: add_feasibility_objective(); break;
        }
        p.validate();
        return std::move(P_);
    }

  private:
    int n() const { return P_.problem.numVars(); }

    RMat lift_psi(const CMat& B) const {
        CMat S = B;
        S.leftCols(P_.layout.M * P_.layout.K) *= P_.wScale;
        return lift_complex_map(S, P_.offW, n());
    }
    RVec lift_lin(const CVec& l) const {
        CVec S = l;
        S.head(P_.layout.M * P_.layout.K) *= P_.wScale;
        return lift_real_part_row(S, P_.offW, n());
    }
    RVec unit(int idx) const {
        RVec e = RVec::Zero(n());
        e(idx) = 1.0;
        return e;
    }

    void add_power() {
        const int mk = P_.layout.M * P_.layout.K;
        RMat A = RMat::Zero(2 * mk, n());
        for (int i = 0; i < 2 * mk; ++i) A(i, P_.offW + i) = 1.0;
        P_.problem.addCone(std::move(A), RVec::Zero(2 * mk), RVec::Zero(n()), 1.0, "power");
    }

    void add_modulus() {
        for (int j = 0; j < P_.layout.Nr; ++j) {
            RMat A = RMat::Zero(2, n());
            A(0, P_.offPhi + 2 * j) = 1.0;
            A(1, P_.offPhi + 2 * j + 1) = 1.0;
            P_.problem.addCone(std::move(A), RVec::Zero(2), RVec::Zero(n()), 1.0, "modulus_" + std::to_string(j));
        }
    }

    void add_sensing(bool withSlack) {
        const int nl = static_cast<int>(ch_.cr.size());
        P_.gammaBar.assign(static_cast<std::size_t>(nl), 0.0);
        P_.sensingActive.assign(static_cast<std::size_t>(nl), false);
        for (int l = 0; l < nl; ++l) {
            const auto ul = static_cast<std::size_t>(l);
            const std::string tag = "sensing_" + std::to_string(l);
            const double uc = std::norm(prev_.u.dot(ch_.ca[ul]));
            const double gs = cfg_.gammaS[ul];
            if (gs <= 0.0) continue;
            const double w0 = cfg_.detectorPower * std::norm(prev_.u.dot(ch_.ea)) + cfg_.noiseS;
            if (uc <= 0.0) {
                require(withSlack, "psi program: combiner is orthogonal to location " + std::to_string(l));
                P_.problem.addLinear(-unit(offLs_ + l), -1.0, tag + "_slack");
                P_.sensingActive[ul] = true;
                continue;
            }
            const double gb = sensing_gamma_bar(l, prev_.u, ch_, cfg_);
            P_.gammaBar[ul] = gb;
            if (gb <= 0.0) continue;
            P_.sensingActive[ul] = true;
            const MinorantData m = lemma1_minorant(ch_.cr[ul], psi0_, P_.layout, ch_.Gr, opt_.balance);
            RVec f = lift_lin(m.lin);
            if (withSlack) f(offLs_ + l) = gs * w0 / (cfg_.rcs[ul] * uc);
            P_.problem.addQuadraticLe(lift_psi(m.Xi1) / std::sqrt(2.0), RVec::Zero(2 * m.Xi1.rows()), f,
                                      m.constant - gb, tag);
        }
    }

    void add_comm(bool withSlack) {
        const PsiLayout& L = P_.layout;
        const int K = L.K;
        const double sl = P_.slackScale;
        for (int k = 0; k < K; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            const double gc = cfg_.gammaC[uk];
            if (gc <= 0.0) continue;
            const double noise = cfg_.noiseCbar[uk];
            const CVec a = ch_.hr[uk].conjugate();
            const MinorantData m = corollary2_minorant(a, k, psi0_, L, ch_.Gr, opt_.balance);

            CVec leak = CVec::Zero(L.size());
            leak.tail(L.Nr) = ch_.hr[uk].cwiseProduct(ch_.er).conjugate();
            const RMat leakRows = lift_psi(leak.transpose());

            const RMat xi = lift_psi(m.Xi1) / std::sqrt(2.0);
            const int rows = static_cast<int>(xi.rows()) + 2 * (K - 1) + 2;
            RMat Q = RMat::Zero(rows, n());
            Q.topRows(xi.rows()) = xi;
            int r = static_cast<int>(xi.rows());
            const double sg = std::sqrt(gc);
            for (int i = 0; i < K; ++i) {
                if (i == k) continue;
                const int pi = pair_index(k, i, K);
                Q(r++, offDelta_ + pi) = sg * sl;
                Q(r++, offChi_ + pi) = sg * sl;
            }
            Q.bottomRows(2) = std::sqrt(gc * cfg_.detectorPower) * leakRows;
            RVec f = lift_lin(m.lin);
            if (withSlack) f(offLc_ + k) = gc * noise;
            P_.problem.addQuadraticLe(Q, RVec::Zero(rows), f, m.constant - gc * noise, "comm_" + std::to_string(k));

            for (int i = 0; i < K; ++i) {
                if (i == k) continue;
                const int pi = pair_index(k, i, K);
                const MajorantData maj = lemma3_majorant(a, i, psi0_, L, ch_.Gr, opt_.balance);
                for (std::size_t dIdx = 0; dIdx < 4; ++dIdx) {
                    const QuadraticForm& q = maj.lambda[dIdx];
                    const int slackVar = MajorantData::slackOf[dIdx] == 0 ? offDelta_ + pi : offChi_ + pi;
                    RVec f2 = -lift_lin(q.lin);
                    f2(slackVar) += sl;
                    const RMat Qm = lift_psi(q.Q);
                    P_.problem.addQuadraticLe(Qm, RVec::Zero(Qm.rows()), f2, -q.constant,
                                              "majorant_" + std::to_string(k) + "_" + std::to_string(i) + "_" +
                                                  std::to_string(dIdx));
                }
            }
        }
    }

    void add_protect_objective(const CVec& lp) {
        const MinorantData m = lemma1_minorant(ch_.er, psi0_, P_.layout, ch_.Gr, opt_.balance);
        const double f0 = true_quadratic(ch_.er, psi0_, P_.layout, ch_.Gr);
        const CVec x2 = m.Xi2 * psi0_;
        const double kappa = std::max({f0, 0.5 * x2.squaredNorm(), 1e-300});
        P_.objScale = kappa;
        P_.problem.addQuadraticLe(lift_psi(m.Xi1) / std::sqrt(2.0), RVec::Zero(2 * m.Xi1.rows()), kappa * unit(offT_),
                                  0.0, "objective_epigraph");
        P_.problem.objective = -unit(offT_) + lift_lin(m.lin) / kappa + opt_.epsPenalty * lift_lin(lp);
        P_.problem.objectiveOffset = m.constant / kappa;
    }

    void add_sense_objective(const CVec& lp) {
        const int nl = static_cast<int>(ch_.cr.size());
        const double w0 = cfg_.detectorPower * std::norm(prev_.u.dot(ch_.ea)) + cfg_.noiseS;
        std::vector<MinorantData> ms;
        std::vector<double> weights, kappas;
        double total = 0.0;
        for (int l = 0; l < nl; ++l) {
            const auto ul = static_cast<std::size_t>(l);
            ms.push_back(lemma1_minorant(ch_.cr[ul], psi0_, P_.layout, ch_.Gr, opt_.balance));
            const double f0 = true_quadratic(ch_.cr[ul], psi0_, P_.layout, ch_.Gr);
            const double kap = std::max({f0, 0.5 * (ms.back().Xi2 * psi0_).squaredNorm(), 1e-300});
            const double w = cfg_.rcs[ul] * std::norm(prev_.u.dot(ch_.ca[ul])) / w0;
            weights.push_back(w);
            kappas.push_back(kap);
            total += w * kap;
        }
        if (!(total > 0.0)) total = 1.0;
        P_.objScale = total;
        RVec obj = opt_.epsPenalty * lift_lin(lp);
        double offset = 0.0;
        for (int l = 0; l < nl; ++l) {
            const auto ul = static_cast<std::size_t>(l);
            const MinorantData& m = ms[ul];
            P_.problem.addQuadraticLe(lift_psi(m.Xi1) / std::sqrt(2.0), RVec::Zero(2 * m.Xi1.rows()),
                                      kappas[ul] * unit(offT_ + l), 0.0, "objective_epigraph_" + std::to_string(l));
            obj += weights[ul] * (-kappas[ul] * unit(offT_ + l) + lift_lin(m.lin)) / total;
            offset += weights[ul] * m.constant / total;
        }
        P_.problem.objective = obj;
        P_.problem.objectiveOffset = offset;
    }

    void add_feasibility_objective() {
        const int nl = static_cast<int>(ch_.cr.size());
        const int K = P_.layout.K;
        RVec obj = RVec::Zero(n());
        for (int l = 0; l < nl; ++l) {
            obj(offLs_ + l) = -1.0;
            P_.problem.addLinear(-unit(offLs_ + l), 0.0, "lambda_s_nonneg_" + std::to_string(l));
        }
        for (int k = 0; k < K; ++k) {
            obj(offLc_ + k) = -1.0;
            P_.problem.addLinear(-unit(offLc_ + k), 0.0, "lambda_c_nonneg_" + std::to_string(k));
        }
        P_.problem.objective = obj;
    }

    const PartitionedChannels& ch_;
    const BeamformingState& prev_;
    const ScenarioConfig& cfg_;
    AssemblyOptions opt_;
    PsiProgram P_;
    CVec psi0_;
    int offT_ = -1, offDelta_ = -1, offChi_ = -1, offLs_ = -1, offLc_ = -1;
};

}  // namespace

BeamformingState PsiProgram::extract(const SolveResult& r, const BeamformingState& prev) const {
    require(r.x.size() == problem.numVars(), "extract: solution size mismatch");
    const CVec w = wScale * read_complex(r.x, offW, layout.M * layout.K);
    BeamformingState s;
    s.W = Eigen::Map<const CMat>(w.data(), layout.M, layout.K);
    s.phi = read_complex(r.x, offPhi, layout.Nr).conjugate();
    s.u = prev.u;
    return s;
}

double sensing_gamma_bar(int l, const CVec& u, const PartitionedChannels& ch, const ScenarioConfig& cfg) {
    require(l >= 0 && l < static_cast<int>(ch.ca.size()), "sensing_gamma_bar: l out of range");
    const auto ul = static_cast<std::size_t>(l);
    const double uc = std::norm(u.dot(ch.ca[ul]));
    require(uc > 0.0, "sensing_gamma_bar: combiner is orthogonal to the location");
    const double w0 = cfg.detectorPower * std::norm(u.dot(ch.ea)) + cfg.noiseS;
    return cfg.gammaS[ul] * w0 / (cfg.rcs[ul] * uc) - cfg.detectorPower * std::norm(ch.d(l));
}

PsiProgram assemble_psi_socp(const PartitionedChannels& ch, const BeamformingState& prev, const ScenarioConfig& cfg,
                             const AssemblyOptions& opt) {
    return PsiBuilder(ch, prev, cfg, opt).build(Goal::Protect);
}

PsiProgram assemble_sense_max(const PartitionedChannels& ch, const BeamformingState& prev, const ScenarioConfig& cfg,
                              const AssemblyOptions& opt) {
    return PsiBuilder(ch, prev, cfg, opt).build(Goal::SenseMax);
}

PsiProgram assemble_init_problem(const PartitionedChannels& ch, const BeamformingState& prev,
                                 const ScenarioConfig& cfg, const AssemblyOptions& opt) {
    return PsiBuilder(ch, prev, cfg, opt).build(Goal::Feasibility);
}

CVec UProgram::extract(const SolveResult& r) const { return read_complex(r.x, offU, na); }

UProgram assemble_u_l1(const PartitionedChannels& ch, const BeamformingState& state, const CVec& uPrev,
                       const ScenarioConfig& cfg, bool keepUpperNorm) {
    const int na = static_cast<int>(ch.ea.size());
    require(na >= 1, "u program: empty absorptive set");
    require(uPrev.size() == na, "u program: uPrev length must equal N_a");
    UProgram out;
    out.na = na;
    ConicProblem& p = out.problem;
    out.offU = p.addBlock("u", na, true);
    const int offT = p.addBlock("t", na);
    const int n = p.numVars();

    RVec obj = RVec::Zero(n);
    for (int i = 0; i < na; ++i) {
        obj(offT + i) = -1.0;
        RMat A = RMat::Zero(2, n);
        A(0, out.offU + 2 * i) = 1.0;
        A(1, out.offU + 2 * i + 1) = 1.0;
        RVec f = RVec::Zero(n);
        f(offT + i) = 1.0;
        p.addCone(std::move(A), RVec::Zero(2), std::move(f), 0.0, "l1_" + std::to_string(i));
    }
    p.objective = obj;

    for (int l = 0; l < static_cast<int>(ch.ca.size()); ++l) {
        if (cfg.gammaS[static_cast<std::size_t>(l)] <= 0.0) continue;
        const USensingLinearization lin = u_sensing_linearization(l, uPrev, ch, cfg, state);
        // gammaOverS (rho^2 |e^H u|^2 + noise ||u||^2) <= Re{g^H u} - offset
        const RMat E = lift_complex_map(CMat(lin.ea.adjoint()), out.offU, n);
        const RMat I = lift_complex_map(CMat::Identity(na, na), out.offU, n);
        RMat Q(E.rows() + I.rows(), n);
        Q.topRows(E.rows()) = std::sqrt(lin.gammaOverS * lin.rho2) * E;
        Q.bottomRows(I.rows()) = std::sqrt(lin.gammaOverS * lin.noise) * I;
        p.addQuadraticLe(Q, RVec::Zero(Q.rows()), lift_real_part_row(lin.g, out.offU, n), -lin.offset,
                         "sensing_" + std::to_string(l));
    }

    const UnitNormLinearization un = unit_norm_linearization(uPrev);
    p.addLinear(-lift_real_part_row(un.g, out.offU, n), -un.rhs, "norm_lower");
    if (keepUpperNorm) {
        RMat A = RMat::Zero(2 * na, n);
        for (int i = 0; i < 2 * na; ++i) A(i, out.offU + i) = 1.0;
        p.addCone(std::move(A), RVec::Zero(2 * na), RVec::Zero(n), 1.0, "norm_upper");
    }
    p.validate();
    return out;
}

}  // namespace risobf
