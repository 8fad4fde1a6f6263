// SPDX-License-Identifier: Apache-2.0
#include "risobf/algorithms.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace risobf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double to_db_safe(double v) {
    if (v <= 0.0) return -kInf;
    return linear_to_db(v);
}

ScenarioConfig with_margin(const ScenarioConfig& cfg, double margin) {
    ScenarioConfig out = cfg;
    for (double& g : out.gammaS) g *= 1.0 + margin;
    for (double& g : out.gammaC) g *= 1.0 + margin;
    return out;
}

class Recorder {
  public:
    Recorder(RunTrace& trace, const ScenarioConfig& cfg) : trace_(trace), cfg_(cfg), start_(Clock::now()) {}

    void add(const std::string& stage, int outer, int iter, const BeamformingState& s, const PartitionedChannels& ch,
             double objective, double delta, const std::string& status) {
        TraceRecord r;
        r.outer = outer;
        r.stage = stage;
        r.iter = iter;
        r.interference = interference_power(s, ch);
        r.maxDetectorSinrDb = to_db_safe(max_detector_sinr(s, ch, cfg_));
        r.nr = static_cast<int>(s.phi.size());
        const FeasibilityReport rep = audit(s, ch, cfg_);
        r.minSensingRatioDb = to_db_safe(rep.minSensingRatio);
        r.minCommRatioDb = to_db_safe(rep.minCommRatio);
        r.powerRatio = rep.powerRatio;
        r.maxModulusDev = rep.maxModulusDev;
        r.objective = objective;
        r.delta = delta;
        r.status = status;
        trace_.records.push_back(r);
        trace_.wallSeconds.push_back(std::chrono::duration<double>(Clock::now() - start_).count());
    }

  private:
    RunTrace& trace_;
    const ScenarioConfig& cfg_;
    Clock::time_point start_;
};

}  // namespace

void AlgorithmSettings::validate() const {
    require(epsConverge > 0 && epsU > 0 && epsOuter > 0 && epsFeas > 0, "settings: thresholds must be > 0");
    require(uZeroThresh > 0 && uZeroThresh < 1, "settings: uZeroThresh must lie in (0,1)");
    require(epsPenalty >= 0, "settings: epsPenalty must be >= 0");
    require(initMargin >= 0 && uMargin >= 0 && projectionTol >= 0 && monotoneTol >= 0, "settings: tolerances must be >= 0");
    require(maxIterInner >= 1 && maxIterOuter >= 1 && maxIterU >= 1 && maxIterInit >= 1,
            "settings: iteration caps must be >= 1");
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::ProposedAdaptive: return "proposed-adaptive";
        case Mode::ProposedFixed: return "proposed-fixed";
        case Mode::BaselineSenseMax: return "baseline-sense-max";
    }
    return "unknown";
}

Mode parse_mode(const std::string& s) {
    if (s == "proposed-adaptive" || s == "adaptive") return Mode::ProposedAdaptive;
    if (s == "proposed-fixed" || s == "fixed") return Mode::ProposedFixed;
    if (s == "baseline-sense-max" || s == "baseline") return Mode::BaselineSenseMax;
    throw InvalidArgument("unknown mode '" + s + "'");
}

bool FeasibilityReport::ok(double sinrTol, double modulusTol, double normTol) const {
    return sinrOk(sinrTol) && powerRatio <= 1.0 + 1e-6 && maxModulusDev <= modulusTol && uNormDev <= normTol;
}

FeasibilityReport audit(const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg) {
    FeasibilityReport rep;
    rep.minSensingRatio = kInf;
    rep.minCommRatio = kInf;
    for (int l = 0; l < static_cast<int>(ch.cr.size()); ++l) {
        const double g = cfg.gammaS[static_cast<std::size_t>(l)];
        if (g <= 0.0) continue;
        rep.minSensingRatio = std::min(rep.minSensingRatio, sensing_sinr_ris(l, s, ch, cfg) / g);
    }
    for (int k = 0; k < static_cast<int>(ch.hr.size()); ++k) {
        const double g = cfg.gammaC[static_cast<std::size_t>(k)];
        if (g <= 0.0) continue;
        rep.minCommRatio = std::min(rep.minCommRatio, comm_sinr(k, s, ch, cfg) / g);
    }
    rep.powerRatio = s.W.squaredNorm() / cfg.pMax;
    rep.maxModulusDev = 0.0;
    for (Eigen::Index i = 0; i < s.phi.size(); ++i) {
        rep.maxModulusDev = std::max(rep.maxModulusDev, std::abs(std::abs(s.phi(i)) - 1.0));
    }
    rep.uNormDev = std::abs(s.u.norm() - 1.0);
    return rep;
}

CVec project_unit_modulus(const CVec& phi) {
    CVec out(phi.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        const double m = std::abs(phi(i));
        out(i) = m > 0.0 ? phi(i) / m : cplx(1.0, 0.0);
    }
    return out;
}

CMat zero_forcing_beams(const PartitionedChannels& ch, const CVec& phi, double pMax) {
    const int K = static_cast<int>(ch.hr.size());
    const int M = static_cast<int>(ch.Gr.cols());
    CMat H(K, M);
    for (int k = 0; k < K; ++k) H.row(k) = ch.hr[static_cast<std::size_t>(k)].cwiseProduct(phi).transpose() * ch.Gr;
    CMat W;
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(H);
    if (K <= M && cod.rank() == K) {
        W = cod.pseudoInverse();
    } else {
        W = H.adjoint();
    }
    const double nrm = W.norm();
    if (!(nrm > 0.0)) W = CMat::Identity(M, K);
    return W * (std::sqrt(pMax) / W.norm());
}

CVec max_min_combiner(const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg,
                      int iterations) {
    const int na = static_cast<int>(ch.ea.size());
    require(na >= 1, "max_min_combiner: empty absorptive set");
    const int L = static_cast<int>(ch.ca.size());
    CMat R = (cfg.detectorPower / cfg.noiseS) * (ch.ea * ch.ea.adjoint());
    R.diagonal().array() += 1.0;

    std::vector<CMat> S;
    for (int l = 0; l < L; ++l) {
        const auto ul = static_cast<std::size_t>(l);
        const double f = effective_row(ch.cr[ul], s, ch).squaredNorm();
        const double gain = cfg.rcs[ul] * (f + cfg.detectorPower * std::norm(ch.d(l))) / cfg.noiseS;
        const double g = cfg.gammaS[ul] > 0.0 ? cfg.gammaS[ul] : 1.0;
        S.push_back((gain / g) * (ch.ca[ul] * ch.ca[ul].adjoint()));
    }
    if (L == 0) {
        CVec u = CVec::Zero(na);
        u(0) = 1.0;
        return u;
    }
    std::vector<double> w(static_cast<std::size_t>(L), 1.0 / L);
    CVec best;
    double bestMin = -1.0;
    for (int it = 0; it < std::max(1, iterations); ++it) {
        CMat A = CMat::Zero(na, na);
        for (int l = 0; l < L; ++l) A += w[static_cast<std::size_t>(l)] * S[static_cast<std::size_t>(l)];
        const double scale = A.cwiseAbs().maxCoeff();
        if (!(scale > 0.0)) break;
        A /= scale;
        A = 0.5 * (A + A.adjoint()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<CMat> ges(A, R);
        CVec u = ges.eigenvectors().col(na - 1);
        u /= u.norm();
        const double den = (u.adjoint() * R * u)(0).real();
        double mn = kInf;
        std::vector<double> ratio(static_cast<std::size_t>(L));
        for (int l = 0; l < L; ++l) {
            const double r = (u.adjoint() * S[static_cast<std::size_t>(l)] * u)(0).real() / den;
            ratio[static_cast<std::size_t>(l)] = r;
            mn = std::min(mn, r);
        }
        if (mn > bestMin) {
            bestMin = mn;
            best = u;
        }
        double tot = 0.0;
        for (int l = 0; l < L; ++l) {
            auto& wl = w[static_cast<std::size_t>(l)];
            wl /= std::max(ratio[static_cast<std::size_t>(l)], 1e-300);
            tot += wl;
        }
        for (double& wl : w) wl /= tot;
    }
    if (best.size() == 0) {
        best = CVec::Zero(na);
        best(0) = 1.0;
    }
    // Fix the global phase so results do not depend on eigen-solver sign conventions.
    Eigen::Index imax = 0;
    best.cwiseAbs().maxCoeff(&imax);
    best *= std::conj(best(imax)) / std::abs(best(imax));
    return best;
}

PsiOutcome optimize_psi(const BeamformingState& start, const PartitionedChannels& ch, const ScenarioConfig& cfg,
                        const AlgorithmSettings& st, RunTrace& trace, int outer, bool senseMax) {
    Recorder rec(trace, cfg);
    PsiOutcome out;
    out.state = start;

    auto solve_once = [&](double eps, BeamformingState& cand, SolveResult& res) {
        AssemblyOptions ao;
        ao.epsPenalty = eps;
        ao.balance = st.balance;
        const PsiProgram prog =
            senseMax ? assemble_sense_max(ch, out.state, cfg, ao) : assemble_psi_socp(ch, out.state, cfg, ao);
        res = solve(prog.problem, st.solver);
        if (res.ok()) cand = prog.extract(res, out.state);
        return res.ok();
    };

    // One SCA pass. The ascent guard only applies to the plain iterations;
    // the repair pass trades interference for unit modulus on purpose.
    auto sca = [&](double eps, const std::string& stage, bool guard) {
        double I = interference_power(out.state, ch);
        CVec psi = stack_psi(out.state.W, out.state.phi);
        bool converged = false;
        for (int it = 1; it <= st.maxIterInner; ++it) {
            if (guard) out.iterations = it;
            BeamformingState cand;
            SolveResult res;
            bool ok = false;
            try {
                ok = solve_once(eps, cand, res);
            } catch (const InvalidArgument& e) {
                trace.notes.push_back(std::string("psi step: ") + e.what());
            }
            if (!ok) {
                out.degraded = true;
                rec.add(stage, outer, it, out.state, ch, res.objective, 0.0, to_string(res.status));
                break;
            }
            double Ic = interference_power(cand, ch);
            std::string status = to_string(res.status);
            if (guard && !senseMax && Ic < I * (1.0 - st.monotoneTol) && eps > 0.0) {
                BeamformingState c2;
                SolveResult r2;
                if (solve_once(0.0, c2, r2)) {
                    cand = c2;
                    res = r2;
                    Ic = interference_power(cand, ch);
                    status = "optimal-no-penalty";
                }
            }
            if (guard && !senseMax && Ic < I * (1.0 - st.monotoneTol)) {
                trace.notes.push_back("psi step: rejected a non-ascent iterate");
                converged = true;
                break;
            }
            const CVec psiNew = stack_psi(cand.W, cand.phi);
            const double delta = (psiNew - psi).squaredNorm();
            out.state = cand;
            psi = psiNew;
            I = Ic;
            if (guard) out.acceptedInterference.push_back(I);
            rec.add(stage, outer, it, out.state, ch, res.objective, delta, status);
            if (delta <= st.epsConverge) {
                converged = true;
                break;
            }
        }
        return converged;
    };

    auto try_projection = [&]() {
        BeamformingState proj = out.state;
        proj.phi = project_unit_modulus(out.state.phi);
        const FeasibilityReport rep = audit(proj, ch, cfg);
        if (rep.sinrOk(st.projectionTol) && rep.powerRatio <= 1.0 + 1e-6) {
            out.state = proj;
            return true;
        }
        return false;
    };

    out.converged = sca(st.epsPenalty, "psi", true);

    out.projected = try_projection();
    rec.add("project", outer, 0, out.state, ch, 0.0, 0.0, out.projected ? "accepted" : "rejected");
    // Penalty continuation until the relaxed coefficients sit on the unit circle.
    double eps = std::max(st.epsPenalty, 1e-3);
    for (int j = 0; !out.projected && j < st.maxRepairSteps; ++j) {
        eps *= st.repairGrowth;
        sca(eps, "repair", false);
        out.projected = try_projection();
        rec.add("project", outer, j + 1, out.state, ch, eps, 0.0, out.projected ? "accepted" : "rejected");
    }
    if (!out.projected) {
        out.degraded = true;
        trace.notes.push_back("projection rejected; keeping relaxed coefficients");
    }
    trace.degraded = trace.degraded || out.degraded;
    return out;
}

std::vector<int> elements_to_reassign(const CVec& u, const ElementPartition& partition, double relThresh) {
    require(u.size() == partition.numAbsorptive(), "elements_to_reassign: u must have N_a entries");
    std::vector<int> drop;
    if (u.size() == 0) return drop;
    const double thr = relThresh * u.cwiseAbs().maxCoeff();
    for (int i = 0; i < u.size(); ++i) {
        if (std::abs(u(i)) <= thr) drop.push_back(partition.absorptive()[static_cast<std::size_t>(i)]);
    }
    return drop;
}

BeamformingState reassign_elements(const BeamformingState& s, const ElementPartition& oldPart,
                                   const ElementPartition& newPart) {
    require(oldPart.total() == newPart.total(), "reassign_elements: surface size mismatch");
    require(s.phi.size() == oldPart.numReflecting() && s.u.size() == oldPart.numAbsorptive(),
            "reassign_elements: state does not match the old partition");
    const auto& oldR = oldPart.reflecting();
    const auto& oldA = oldPart.absorptive();
    BeamformingState out;
    out.W = s.W;
    out.phi = CVec::Zero(newPart.numReflecting());
    for (int i = 0; i < newPart.numReflecting(); ++i) {
        const int idx = newPart.reflecting()[static_cast<std::size_t>(i)];
        const auto pos = std::lower_bound(oldR.begin(), oldR.end(), idx);
        if (pos != oldR.end() && *pos == idx) out.phi(i) = s.phi(pos - oldR.begin());
    }
    out.u = CVec::Zero(newPart.numAbsorptive());
    for (int i = 0; i < newPart.numAbsorptive(); ++i) {
        const int idx = newPart.absorptive()[static_cast<std::size_t>(i)];
        const auto pos = std::lower_bound(oldA.begin(), oldA.end(), idx);
        require(pos != oldA.end() && *pos == idx, "reassign_elements: reflecting elements cannot become absorptive");
        out.u(i) = s.u(pos - oldA.begin());
    }
    const double nrm = out.u.norm();
    if (nrm > 0.0) out.u /= nrm;
    return out;
}

UOutcome optimize_u_and_partition(const BeamformingState& start, const ChannelSet& full,
                                  const ElementPartition& partition, const ScenarioConfig& cfg,
                                  const AlgorithmSettings& st, RunTrace& trace, int outer, bool reassign) {
    Recorder rec(trace, cfg);
    UOutcome out;
    out.state = start;
    out.partition = partition;
    out.channels = partition_channels(full, partition);
    const PartitionedChannels& ch = out.channels;

    const ScenarioConfig tight = with_margin(cfg, st.uMargin);
    CVec u = start.u / start.u.norm();
    bool moved = false;
    for (int it = 1; it <= st.maxIterU; ++it) {
        SolveResult res;
        CVec un;
        try {
            const UProgram prog = assemble_u_l1(ch, out.state, u, tight, st.keepUpperNormConstraint);
            res = solve(prog.problem, st.solver);
            if (res.ok()) un = prog.extract(res);
        } catch (const InvalidArgument& e) {
            trace.notes.push_back(std::string("u step: ") + e.what());
        }
        if (!res.ok() || !(un.norm() > 0.0)) {
            if (!moved) out.infeasible = true;
            BeamformingState tmp = out.state;
            tmp.u = u;
            rec.add("u", outer, it, tmp, ch, res.objective, 0.0, to_string(res.status));
            break;
        }
        un /= un.norm();
        const double delta = (un - u).squaredNorm();
        u = un;
        moved = true;
        BeamformingState tmp = out.state;
        tmp.u = u;
        rec.add("u", outer, it, tmp, ch, res.objective, delta, to_string(res.status));
        if (delta <= st.epsU) break;
    }
    if (out.infeasible) {
        trace.notes.push_back("u step infeasible; partition unchanged");
        out.state = start;
        trace.nrHistory.push_back(partition.numReflecting());
        return out;
    }
    BeamformingState cand = start;
    cand.u = u;
    if (audit(cand, ch, cfg).minSensingRatio >= 1.0 - 1e-6) {
        out.state = cand;
    } else {
        trace.notes.push_back("u step: combiner failed the sensing check; keeping the previous one");
    }

    if (reassign) {
        const std::vector<int> drop = elements_to_reassign(out.state.u, partition, st.uZeroThresh);
        if (!drop.empty()) {
            ElementPartition np = partition;
            np.promoteToReflecting(drop);
            const BeamformingState ns = reassign_elements(out.state, partition, np);
            PartitionedChannels nch = partition_channels(full, np);
            if (audit(ns, nch, cfg).minSensingRatio >= 1.0 - 1e-6) {
                out.state = ns;
                out.partition = np;
                out.channels = std::move(nch);
                out.changed = true;
                out.reassigned = drop;
                rec.add("reassign", outer, 0, out.state, out.channels, 0.0, static_cast<double>(drop.size()),
                        "changed");
            } else {
                trace.notes.push_back("reassignment broke a sensing constraint; partition unchanged");
            }
        }
    }
    trace.nrHistory.push_back(out.partition.numReflecting());
    return out;
}

InitOutcome find_initial_point(const ChannelSet& full, const ElementPartition& partition, const ScenarioConfig& cfg,
                               const AlgorithmSettings& st, RunTrace& trace) {
    Recorder rec(trace, cfg);
    InitOutcome out;
    out.partition = partition;
    const PartitionedChannels ch = partition_channels(full, partition);
    const ScenarioConfig tight = with_margin(cfg, st.initMargin);

    BeamformingState& s = out.state;
    s.phi = CVec::Ones(partition.numReflecting());
    s.W = zero_forcing_beams(ch, s.phi, cfg.pMax);
    s.u = max_min_combiner(s, ch, tight);

    auto feasible = [&](const BeamformingState& x) {
        const FeasibilityReport r = audit(x, ch, tight);
        return r.sinrOk(0.0) && r.powerRatio <= 1.0 + 1e-9;
    };
    rec.add("init", 0, 0, s, ch, 0.0, 0.0, "start");
    if (feasible(s)) {
        out.feasible = true;
        return out;
    }
    AssemblyOptions ao;
    ao.epsPenalty = 0.0;
    ao.balance = st.balance;
    for (int it = 1; it <= st.maxIterInit; ++it) {
        out.iterations = it;
        SolveResult res;
        try {
            const PsiProgram prog = assemble_init_problem(ch, s, tight, ao);
            res = solve(prog.problem, st.solver);
            if (res.ok()) {
                out.sumSlack = res.block(prog.problem, "lambda_s").sum() + res.block(prog.problem, "lambda_c").sum();
                s = prog.extract(res, s);
            }
        } catch (const InvalidArgument& e) {
            trace.notes.push_back(std::string("init step: ") + e.what());
        }
        if (!res.ok()) {
            rec.add("init", 0, it, s, ch, res.objective, out.sumSlack, to_string(res.status));
            break;
        }
        s.phi = project_unit_modulus(s.phi);
        s.u = max_min_combiner(s, ch, tight);
        rec.add("init", 0, it, s, ch, -out.sumSlack, out.sumSlack, to_string(res.status));
        if (feasible(s)) {
            out.feasible = true;
            break;
        }
    }
    return out;
}

RunResult run_on_scenario(const Scenario& sc, const ScenarioConfig& cfgIn, const AlgorithmSettings& st, Mode mode) {
    st.validate();
    ScenarioConfig cfg = cfgIn;
    cfg.normalize();
    cfg.validate();
    RunResult res;
    res.scenario = sc;
    RunTrace& trace = res.trace;

    const InitOutcome init = find_initial_point(sc.channels, sc.partition, cfg, st, trace);
    res.initFeasible = init.feasible;
    res.state = init.state;
    res.partition = init.partition;
    PartitionedChannels ch = partition_channels(sc.channels, res.partition);
    trace.nrHistory.push_back(res.partition.numReflecting());

    if (init.feasible) {
        const bool senseMax = mode == Mode::BaselineSenseMax;
        auto progress = [&](const BeamformingState& s) {
            if (!senseMax) return interference_power(s, ch);
            double tot = 0.0;
            for (int l = 0; l < static_cast<int>(ch.cr.size()); ++l) tot += sensing_sinr_ris(l, s, ch, cfg);
            return tot;
        };
        double prev = progress(res.state);
        bool changedLast = false;
        Recorder rec(trace, cfg);
        for (int outer = 1; outer <= st.maxIterOuter; ++outer) {
            res.outerIterations = outer;
            const PsiOutcome ps = optimize_psi(res.state, ch, cfg, st, trace, outer, senseMax);
            res.state = ps.state;
            const double cur = progress(res.state);
            const double gain = (cur - prev) / std::max(std::abs(prev), 1e-300);
            if (outer > 1 && gain <= st.epsOuter && !changedLast) {
                res.converged = true;
                break;
            }
            if (outer == st.maxIterOuter) break;
            if (senseMax) {
                res.state.u = max_min_combiner(res.state, ch, cfg);
                rec.add("u", outer, 1, res.state, ch, 0.0, 0.0, "max-min");
                changedLast = false;
                trace.nrHistory.push_back(res.partition.numReflecting());
            } else {
                const UOutcome uo = optimize_u_and_partition(res.state, sc.channels, res.partition, cfg, st, trace,
                                                             outer, mode == Mode::ProposedAdaptive);
                res.state = uo.state;
                res.partition = uo.partition;
                ch = uo.channels;
                changedLast = uo.changed;
            }
            prev = progress(res.state);
        }
    }
    res.report = audit(res.state, ch, cfg);
    res.maxDetectorSinr = max_detector_sinr(res.state, ch, cfg);
    res.interference = interference_power(res.state, ch);
    return res;
}

RunResult run_main(const ScenarioConfig& cfg, const AlgorithmSettings& st, Mode mode) {
    const Scenario sc = build_scenario(cfg);
    return run_on_scenario(sc, cfg, st, mode);
}

void write_trace_csv(const RunTrace& trace, std::ostream& os) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(6);
    os << "outer,stage,iter,interference,max_det_sinr_db,nr,min_sensing_ratio_db,min_comm_ratio_db,power_ratio,"
          "max_modulus_dev,objective,delta,status\n";
    for (const auto& r : trace.records) {
        os << r.outer << ',' << r.stage << ',' << r.iter << ',' << r.interference << ',' << r.maxDetectorSinrDb << ','
           << r.nr << ',' << r.minSensingRatioDb << ',' << r.minCommRatioDb << ',' << r.powerRatio << ','
           << r.maxModulusDev << ',' << r.objective << ',' << r.delta << ',' << r.status << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

void write_timing_csv(const RunTrace& trace, std::ostream& os) {
    os << "record,wall_seconds\n";
    for (std::size_t i = 0; i < trace.wallSeconds.size(); ++i) os << i << ',' << trace.wallSeconds[i] << '\n';
}

}  // namespace risobf
