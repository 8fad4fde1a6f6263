// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"
#include "risobf/algorithms.hpp"

#include "doctest.h"

#include <sstream>

using namespace risobf;

TEST_CASE("solver: unit ball") {
    ConicProblem p;
    p.addBlock("x", 2);
    p.objective = RVec::Zero(2);
    p.objective(0) = 1.0;  // maximize x, i.e. minimize -x
    p.addCone(RMat::Identity(2, 2), RVec::Zero(2), RVec::Zero(2), 1.0, "ball");
    const SolveResult r = solve(p);
    REQUIRE(r.ok());
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(r.x(1)) < 1e-6);
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("solver: contradictory rows") {
    ConicProblem p;
    p.addBlock("x", 1);
    p.objective = RVec::Zero(1);
    p.addLinear(RVec::Constant(1, 1.0), -1.0, "x<=-1");
    p.addLinear(RVec::Constant(1, -1.0), -1.0, "x>=1");
    const SolveResult r = solve(p);
    CHECK(r.status == SolveStatus::Infeasible);
    CHECK_FALSE(r.ok());
}

TEST_CASE("solver: projection onto a ball") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int t = 0; t < 20; ++t) {
        const int n = 5;
        RVec c(n);
        for (int i = 0; i < n; ++i) c(i) = g(rng);
        const double radius = 0.5 + 0.1 * t;
        // min s  s.t. ||x - c|| <= s, ||x|| <= radius
        ConicProblem p;
        p.addBlock("x", n);
        const int os = p.addBlock("s", 1);
        p.objective = RVec::Zero(n + 1);
        p.objective(os) = -1.0;
        RMat A = RMat::Zero(n, n + 1);
        A.leftCols(n).setIdentity();
        RVec f = RVec::Zero(n + 1);
        f(os) = 1.0;
        p.addCone(A, -c, f, 0.0, "dist");
        p.addCone(A, RVec::Zero(n), RVec::Zero(n + 1), radius, "ball");
        const SolveResult r = solve(p);
        REQUIRE(r.ok());
        const RVec want = c.norm() > radius ? RVec(c * (radius / c.norm())) : c;
        CHECK((r.x.head(n) - want).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(p.maxViolation(r.x) <= 1e-6);
    }
}

TEST_CASE("solver: quadratic constraint as rotated cone") {
    // maximize x s.t. x^2 + y^2 <= 2 + y  ->  x = sqrt(2.25), y = 0.5
    ConicProblem p;
    p.addBlock("v", 2);
    p.objective = RVec::Zero(2);
    p.objective(0) = 1.0;
    RVec f = RVec::Zero(2);
    f(1) = 1.0;
    p.addQuadraticLe(RMat::Identity(2, 2), RVec::Zero(2), f, 2.0, "quad");
    const SolveResult r = solve(p);
    REQUIRE(r.ok());
    CHECK(r.x(0) == doctest::Approx(1.5).epsilon(1e-6));
    // y sits in a flat direction of the objective
    CHECK(r.x(1) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("complex lifting round trip") {
    std::mt19937_64 rng(22);
    const CMat B = test::rand_cmat(3, 2, rng);
    const CVec z = test::rand_cvec(2, rng);
    RVec x = RVec::Zero(7);
    write_complex(x, 1, z);
    CHECK((read_complex(x, 1, 2) - z).norm() == 0.0);
    const RVec y = lift_complex_map(B, 1, 7) * x;
    const CVec want = B * z;
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(y(i) - want(i).real()) < 1e-12);
        CHECK(std::abs(y(3 + i) - want(i).imag()) < 1e-12);
    }
    const CVec l = test::rand_cvec(2, rng);
    CHECK(std::abs(lift_real_part_row(l, 1, 7).dot(x) - l.dot(z).real()) < 1e-12);
}

namespace {

struct DeskPoint {
    ScenarioConfig cfg;
    Scenario sc;
    InitOutcome init;
    PartitionedChannels ch;
};

DeskPoint desk_feasible(std::uint64_t seed) {
    DeskPoint d;
    d.cfg = test::desk_config(2, seed);
    d.sc = build_scenario(d.cfg);
    RunTrace trace;
    d.init = find_initial_point(d.sc.channels, d.sc.partition, d.cfg, AlgorithmSettings{}, trace);
    d.ch = partition_channels(d.sc.channels, d.init.partition);
    return d;
}

}  // namespace

TEST_CASE("problem dump round trip") {
    const DeskPoint d = desk_feasible(3);
    REQUIRE(d.init.feasible);
    const PsiProgram prog = assemble_psi_socp(d.ch, d.init.state, d.cfg);
    std::stringstream a;
    dump_problem(prog.problem, a);
    std::stringstream in(a.str());
    const ConicProblem back = parse_problem(in);
    std::stringstream b;
    dump_problem(back, b);
    CHECK(a.str() == b.str());
    CHECK(back.numVars() == prog.problem.numVars());
    CHECK(back.cones.size() == prog.problem.cones.size());
    const SolveResult r1 = solve(prog.problem), r2 = solve(back);
    REQUIRE(r1.ok());
    REQUIRE(r2.ok());
    CHECK((r1.x - r2.x).cwiseAbs().maxCoeff() == 0.0);

    std::stringstream bad("risobf-conic 2\n");
    CHECK_THROWS_AS(parse_problem(bad), InvalidArgument);
}

TEST_CASE("documented dump example parses and solves") {
    const std::string text =
        "risobf-conic 1\nvars 2\nblocks 1\nblock x 0 2 0 1\nobjective 0\n1 0\nlinear 0\ncones 1\n"
        "cone ball 2 1\n0 0\n0 1 0\n0 0 1\nend\n";
    std::istringstream in(text);
    const ConicProblem p = parse_problem(in);
    std::ostringstream out;
    dump_problem(p, out);
    CHECK(out.str() == text);
    const SolveResult r = solve(p);
    REQUIRE(r.ok());
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("psi program variable count at full-scale dimensions") {
    ScenarioConfig cfg = default_config();
    const Scenario sc = build_scenario(cfg);
    REQUIRE(sc.partition.numReflecting() == 40);
    const auto ch = partition_channels(sc.channels, sc.partition);
    BeamformingState s;
    s.phi = CVec::Ones(40);
    s.W = zero_forcing_beams(ch, s.phi, cfg.pMax);
    s.u = CVec::Ones(24).normalized();
    const PsiProgram prog = assemble_psi_socp(ch, s, cfg);
    int core = 0;
    for (const char* name : {"W", "phi", "delta", "chi"}) core += prog.problem.block(name).size;
    CHECK(core == 136);
    CHECK(prog.problem.block("W").size == 32);
    CHECK(prog.problem.block("phi").size == 80);
    // every row is affine or a second-order cone of dimension >= 2
    for (const auto& c : prog.problem.cones) CHECK(c.dim() >= 2);
    CHECK_NOTHROW(prog.problem.validate());
}

TEST_CASE("psi program ascent at a feasible point") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const DeskPoint d = desk_feasible(seed);
        REQUIRE(d.init.feasible);
        AssemblyOptions opt;
        opt.epsPenalty = 0.0;
        const PsiProgram prog = assemble_psi_socp(d.ch, d.init.state, d.cfg, opt);
        const SolveResult r = solve(prog.problem);
        REQUIRE(r.ok());
        const BeamformingState next = prog.extract(r, d.init.state);
        const PsiLayout L = prog.layout;
        const CVec psi0 = stack_psi(d.init.state.W, d.init.state.phi);
        const CVec psi1 = stack_psi(next.W, next.phi);
        const MinorantData m = lemma1_minorant(d.ch.er, psi0, L, d.ch.Gr);
        const double before = interference_power(d.init.state, d.ch);
        CHECK(m.value(psi1) >= before * (1.0 - 1e-6));
        CHECK(interference_power(next, d.ch) >= before * (1.0 - 1e-6));
        CHECK(next.W.squaredNorm() <= d.cfg.pMax * (1.0 + 1e-6));
        CHECK(next.phi.cwiseAbs().maxCoeff() <= 1.0 + 1e-6);
    }
}

TEST_CASE("initialization program with zero thresholds") {
    ScenarioConfig cfg = test::desk_config(2, 4);
    std::fill(cfg.gammaS.begin(), cfg.gammaS.end(), 0.0);
    std::fill(cfg.gammaC.begin(), cfg.gammaC.end(), 0.0);
    const Scenario sc = build_scenario(cfg);
    const auto ch = partition_channels(sc.channels, sc.partition);
    BeamformingState s;
    s.phi = CVec::Ones(ch.Gr.rows());
    s.W = zero_forcing_beams(ch, s.phi, cfg.pMax);
    s.u = CVec::Ones(ch.ea.size()).normalized();
    const PsiProgram prog = assemble_init_problem(ch, s, cfg);
    const SolveResult r = solve(prog.problem);
    REQUIRE(r.ok());
    const double sum = r.block(prog.problem, "lambda_s").sum() + r.block(prog.problem, "lambda_c").sum();
    CHECK(std::abs(sum) < 1e-6);

    RunTrace trace;
    const InitOutcome init = find_initial_point(sc.channels, sc.partition, cfg, AlgorithmSettings{}, trace);
    CHECK(init.feasible);
    CHECK(init.sumSlack < 1e-6);
    CHECK(init.iterations <= 1);
}

TEST_CASE("initialization slacks descend under aggressive thresholds") {
    ScenarioConfig cfg = test::desk_config(2, 5);
    std::fill(cfg.gammaS.begin(), cfg.gammaS.end(), db_to_linear(60.0));
    const Scenario sc = build_scenario(cfg);
    const auto ch = partition_channels(sc.channels, sc.partition);
    BeamformingState s;
    s.phi = CVec::Ones(ch.Gr.rows());
    s.W = zero_forcing_beams(ch, s.phi, cfg.pMax);
    s.u = max_min_combiner(s, ch, cfg);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 4; ++it) {
        const PsiProgram prog = assemble_init_problem(ch, s, cfg);
        const SolveResult r = solve(prog.problem);
        REQUIRE(r.ok());
        const double sum = r.block(prog.problem, "lambda_s").sum() + r.block(prog.problem, "lambda_c").sum();
        CHECK(sum > 0.0);
        CHECK(sum <= prev * (1.0 + 1e-6));
        prev = sum;
        s = prog.extract(r, s);
    }
}


namespace {

// Evaluates the lifted point [u, |u|] against the u-program rows.
double u_violation(const UProgram& up, const CVec& u) {
    RVec x = RVec::Zero(up.problem.numVars());
    write_complex(x, up.offU, u);
    const int offT = up.problem.block("t").offset;
    for (int i = 0; i < u.size(); ++i) x(offT + i) = std::abs(u(i));
    return up.problem.maxViolation(x);
}

}  // namespace

TEST_CASE("combiner program: norm constraints only") {
    std::mt19937_64 rng(31);
    ScenarioConfig cfg = test::unit_config(2, 2);
    std::fill(cfg.gammaS.begin(), cfg.gammaS.end(), 0.0);
    const auto ch = test::rand_channels(2, 3, 4, 2, 2, rng);
    const auto s = test::rand_state(2, 2, 3, 4, rng);
    const UProgram up = assemble_u_l1(ch, s, s.u, cfg);
    const SolveResult r = solve(up.problem);
    REQUIRE(r.ok());
    const CVec u = up.extract(r);
    // feasible start bounds the objective
    CHECK(u.cwiseAbs().sum() <= s.u.cwiseAbs().sum() + 1e-6);
    // min ||u||_1 s.t. Re{uPrev^H u} >= 1 has value 1 / max|uPrev_i|
    CHECK(u.cwiseAbs().sum() == doctest::Approx(1.0 / s.u.cwiseAbs().maxCoeff()).epsilon(1e-6));
    CHECK(u.normalized().norm() == doctest::Approx(1.0).epsilon(1e-12));

    // with the upper bound kept, uPrev is the only feasible point
    const UProgram tight = assemble_u_l1(ch, s, s.u, cfg, true);
    CHECK(tight.problem.cones.size() == up.problem.cones.size() + 1);
    CHECK(u_violation(tight, s.u) < 1e-12);
    CHECK(u_violation(tight, 1.01 * s.u) > 0.0);
    CHECK(u_violation(tight, 0.99 * s.u) > 0.0);
}

TEST_CASE("combiner program: dominant location against 1-sparse search") {
    std::mt19937_64 rng(32);
    ScenarioConfig cfg = test::unit_config(1, 1);
    auto ch = test::rand_channels(2, 3, 4, 1, 1, rng);
    const int j = 2;
    ch.ca[0] = CVec::Zero(4);
    ch.ca[0](j) = 1.0;
    ch.ea *= 0.1;
    const auto s = test::rand_state(2, 1, 3, 4, rng);
    CVec uPrev = CVec::Constant(4, 0.4);
    uPrev(j) = 0.7;
    uPrev.normalize();
    cfg.gammaS = {1.0};
    const auto lin = u_sensing_linearization(0, uPrev, ch, cfg, s);
    // require a sensing margin that only coordinate j can pay for
    cfg.gammaS = {1.0 / lin.gammaOverS * 0.2};
    const UProgram up = assemble_u_l1(ch, s, uPrev, cfg);
    const SolveResult r = solve(up.problem);
    REQUIRE(r.ok());
    const CVec u = up.extract(r);

    // exhaustive search over supports of size one, on a fine grid of t
    double best = std::numeric_limits<double>::infinity();
    int bestIdx = -1;
    for (int i = 0; i < 4; ++i) {
        for (int step = 1; step <= 100000; ++step) {
            const double t = 1e-4 * step;
            CVec cand = CVec::Zero(4);
            cand(i) = t;
            if (u_violation(up, cand) <= 1e-9) {
                if (t < best) {
                    best = t;
                    bestIdx = i;
                }
                break;
            }
        }
    }
    REQUIRE(bestIdx == j);
    Eigen::Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    CHECK(arg == j);
    CHECK(u.cwiseAbs().sum() <= best + 1e-6);
    CHECK(u.cwiseAbs().sum() >= best - 1e-4 - 1e-6);
    double off = 0.0;
    for (int i = 0; i < 4; ++i)
        if (i != j) off += std::abs(u(i));
    CHECK(off < 1e-5 * std::abs(u(j)));
}
