// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"
#include "risobf/harness.hpp"

#include "doctest.h"

#include <boost/math/special_functions/gamma.hpp>

using namespace risobf;

namespace {

// Dense re-evaluation with explicit Phi.
struct Naive {
    const BeamformingState& s;
    const PartitionedChannels& ch;
    const ScenarioConfig& cfg;

    CMat phi() const { return test::diag_mat(s.phi); }

    double comm(int k) const {
        const CMat Phi = phi();
        double num = 0.0, den = 0.0;
        for (int i = 0; i < s.W.cols(); ++i) {
            const cplx v = (ch.hr[k].transpose() * Phi * ch.Gr * s.W.col(i))(0, 0);
            (i == k ? num : den) += std::norm(v);
        }
        den += cfg.detectorPower * std::norm((ch.hr[k].transpose() * Phi * ch.er)(0, 0));
        return num / (den + cfg.noiseCbar[k]);
    }
    double f(const CVec& a) const { return (a.adjoint() * phi() * ch.Gr * s.W).squaredNorm(); }
    double ris(int l) const {
        const double uc = std::norm((s.u.adjoint() * ch.ca[l])(0, 0));
        const double ue = std::norm((s.u.adjoint() * ch.ea)(0, 0));
        const double r = cfg.rcs[l];
        return (r * uc * f(ch.cr[l]) + r * cfg.detectorPower * std::norm(ch.d(l)) * uc) /
               (cfg.detectorPower * ue + cfg.noiseS);
    }
    double det(int l) const {
        const double d2 = std::norm(ch.d(l));
        const double r = cfg.rcs[l];
        return (r * cfg.detectorPower * d2 * d2 + r * d2 * f(ch.cr[l])) / (f(ch.er) + cfg.noiseD);
    }
};

}  // namespace

TEST_CASE("comm SINR scalar example") {
    ScenarioConfig cfg = test::unit_config(1, 1);
    cfg.detectorPower = 1.0;
    cfg.noiseCbar = {1.0};
    PartitionedChannels ch;
    ch.Gr = CMat::Constant(1, 1, 1.0);
    ch.hr = {CVec::Constant(1, 1.0)};
    ch.er = CVec::Constant(1, 1.0);
    BeamformingState s;
    s.W = CMat::Constant(1, 1, 2.0);
    s.phi = CVec::Constant(1, 1.0);
    // signal |2|^2 = 4, leak 1, noise 1
    CHECK(comm_sinr(0, s, ch, cfg) == doctest::Approx(2.0).epsilon(1e-15));
    s.W.setZero();
    CHECK(comm_sinr(0, s, ch, cfg) == 0.0);
    CHECK_THROWS_AS(comm_sinr(1, s, ch, cfg), InvalidArgument);
}

TEST_CASE("SINRs match dense re-evaluation") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int M = 2, nr = 2, na = 3, K = 2, L = 3;
        const ScenarioConfig cfg = test::unit_config(K, L);
        const auto ch = test::rand_channels(M, nr, na, K, L, rng);
        const auto s = test::rand_state(M, K, nr, na, rng);
        const Naive nv{s, ch, cfg};
        for (int k = 0; k < K; ++k) CHECK(std::abs(comm_sinr(k, s, ch, cfg) - nv.comm(k)) <= 1e-12 * nv.comm(k));
        for (int l = 0; l < L; ++l) {
            CHECK(std::abs(sensing_sinr_ris(l, s, ch, cfg) - nv.ris(l)) <= 1e-12 * nv.ris(l));
            CHECK(std::abs(sensing_sinr_detector(l, s, ch, cfg) - nv.det(l)) <= 1e-12 * nv.det(l));
            const auto [w0, w1] = omega_params(l, s, ch, cfg);
            CHECK(std::abs((w1 - w0) / w0 - sensing_sinr_ris(l, s, ch, cfg)) <= 1e-12 * nv.ris(l));
        }
        CHECK(std::abs(interference_power(s, ch) - nv.f(ch.er)) <= 1e-12 * nv.f(ch.er));
    }
}

TEST_CASE("sensing SINR degenerate cases") {
    ScenarioConfig cfg = test::unit_config(1, 1);
    PartitionedChannels ch;
    ch.Gr = CMat::Constant(1, 1, 1.0);
    ch.hr = {CVec::Constant(1, 1.0)};
    ch.cr = {CVec::Constant(1, 1.0)};
    ch.er = CVec::Constant(1, 1.0);
    ch.ca = {CVec::Constant(2, 0.0)};
    ch.ca[0](0) = 1.0;
    ch.ea = CVec::Zero(2);
    ch.d = CVec::Constant(1, 1.0);
    BeamformingState s;
    s.W = CMat::Constant(1, 1, 1.0);
    s.phi = CVec::Constant(1, 1.0);
    s.u = CVec::Zero(2);
    s.u(1) = 1.0;

    SUBCASE("orthogonal combiner") { CHECK(sensing_sinr_ris(0, s, ch, cfg) == 0.0); }
    SUBCASE("silent detector, unit quantities") {
        s.u = ch.ca[0];
        cfg.detectorPower = 0.0;
        cfg.rcs = {2.0};
        cfg.noiseS = 0.5;
        CHECK(sensing_sinr_ris(0, s, ch, cfg) == doctest::Approx(2.0 / 0.5).epsilon(1e-15));
    }
    SUBCASE("detector-only sensing when W = 0") {
        s.W.setZero();
        ch.d(0) = cplx(0.0, 1.5);
        const double d2 = 2.25;
        CHECK(sensing_sinr_detector(0, s, ch, cfg) ==
              doctest::Approx(cfg.rcs[0] * cfg.detectorPower * d2 * d2 / cfg.noiseD).epsilon(1e-14));
    }
    SUBCASE("blocked location") {
        ch.d(0) = 0.0;
        CHECK(sensing_sinr_detector(0, s, ch, cfg) == 0.0);
    }
    SUBCASE("omega0 arithmetic") {
        cfg.detectorPower = 1.0;
        cfg.noiseS = 0.5;
        ch.ea(0) = 0.5;
        s.u = ch.ca[0];
        const auto [w0, w1] = omega_params(0, s, ch, cfg);
        CHECK(w0 == doctest::Approx(0.75).epsilon(1e-15));
        CHECK(w1 > w0);
        s.W.setZero();
        ch.d(0) = 0.0;
        const auto [z0, z1] = omega_params(0, s, ch, cfg);
        CHECK(z1 == z0);
    }
    SUBCASE("empty absorptive set") {
        ch.ca = {CVec()};
        ch.ea = CVec();
        s.u = CVec();
        CHECK_THROWS_AS(sensing_sinr_ris(0, s, ch, cfg), InvalidArgument);
    }
}

TEST_CASE("detection thresholds") {
    CHECK(detection_threshold(1.0, 2.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(detection_threshold(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(detection_threshold(2.0, 2.0 * (1.0 + 1e-12)) == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(detection_threshold(1.0, 1.0 + 1e-6) == doctest::Approx(1.0 + 5e-7).epsilon(1e-11));
    CHECK(global_threshold({1.5, 1.2, 2.0}) == 1.2);
    CHECK_THROWS_AS(detection_threshold(1.0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(global_threshold({}), InvalidArgument);
}

TEST_CASE("single-shot FA and MD") {
    CHECK(std::abs(fa_probability(0.0) - std::exp(-1.0)) < 1e-15);
    CHECK(std::abs(md_probability(0.0) - (1.0 - std::exp(-1.0))) < 1e-15);
    CHECK(fa_probability(1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(md_probability(1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(fa_probability(3.0) == doctest::Approx(std::pow(4.0, -4.0 / 3.0)).epsilon(1e-14));
    CHECK(md_probability(3.0) == doctest::Approx(1.0 - std::pow(4.0, -1.0 / 3.0)).epsilon(1e-14));
    CHECK(std::abs(fa_probability(3.0) - 0.1575) < 5e-5);
    CHECK(std::abs(md_probability(3.0) - 0.3700) < 5e-5);
    CHECK_THROWS_AS(fa_probability(-0.1), InvalidArgument);
    CHECK_THROWS_AS(md_probability(-0.1), InvalidArgument);

    // strictly decreasing on a log grid, below the worst case
    double pPrev = std::exp(-1.0), qPrev = 1.0 - std::exp(-1.0);
    for (int i = 0; i <= 80; ++i) {
        const double g = std::pow(10.0, -4.0 + 0.1 * i);
        const double p = fa_probability(g), q = md_probability(g);
        CHECK(p < pPrev);
        CHECK(q < qPrev);
        pPrev = p;
        qPrev = q;
    }
}

TEST_CASE("averaged FA and MD") {
    CHECK(fa_averaged(0.3, 1) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(md_averaged(0.6, 1) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(std::abs(fa_averaged(0.25, 2) - 0.0625 * (1.0 + 2.0 * std::log(4.0))) < 1e-14);
    CHECK(std::abs(fa_averaged(0.25, 2) - 0.2358) < 5e-5);
    CHECK_THROWS_AS(fa_averaged(0.3, 0), InvalidArgument);

    // Erlang tail oracle
    for (int tS = 1; tS <= 20; ++tS) {
        for (double p : {0.05, 0.25, std::exp(-1.0)}) {
            CHECK(std::abs(fa_averaged(p, tS) - boost::math::gamma_q(tS, -tS * std::log(p))) < 1e-10);
        }
        for (double q : {0.1, 0.5, 1.0 - std::exp(-1.0)}) {
            CHECK(std::abs(md_averaged(q, tS) - boost::math::gamma_p(tS, -tS * std::log1p(-q))) < 1e-10);
        }
    }
    // large tS stays finite
    CHECK(std::isfinite(fa_averaged(0.2, 500)));
}

TEST_CASE("detection closed forms against the Monte Carlo test") {
    const long long n = 100000;
    for (double gamma : {1.0, 3.0}) {
        const double thr = detection_threshold(1.0, 1.0 + gamma);
        const OracleResult r = detection_oracle_serial(1.0, 1.0 + gamma, thr, 1, n, 99);
        CHECK(std::abs(r.pHat - fa_probability(gamma)) <= 3.0 * r.pSigma);
        CHECK(std::abs(r.qHat - md_probability(gamma)) <= 3.0 * r.qSigma);
    }
}

TEST_CASE("detection stats bounds") {
    std::mt19937_64 rng(8);
    const ScenarioConfig cfg = test::unit_config(2, 3);
    const auto ch = test::rand_channels(2, 3, 3, 2, 3, rng);
    const auto s = test::rand_state(2, 2, 3, 3, rng);
    const DetectionStats d = detection_stats(s, ch, cfg);
    REQUIRE(d.omega1.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(d.omega1[l] > d.omega0);
        CHECK(d.fa[l] <= std::exp(-1.0));
        CHECK(d.md[l] <= 1.0 - std::exp(-1.0));
        CHECK(d.faAvg[l] >= 0.0);
        CHECK(d.mdAvg[l] <= 1.0);
    }
    CHECK(d.globalThresh == *std::min_element(d.thresh.begin(), d.thresh.end()));
}
