// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"

#include "doctest.h"

#include <unsupported/Eigen/KroneckerProduct>

using namespace risobf;

namespace {

struct Instance {
    PsiLayout layout;
    CMat Gr;
    CVec a;
    CVec psi0;
    CVec psi;
};

Instance draw(std::mt19937_64& rng, int M = 2, int nr = 4, int K = 2) {
    Instance in;
    in.layout = PsiLayout{M, K, nr};
    in.Gr = test::rand_cmat(nr, M, rng);
    in.a = test::rand_cvec(nr, rng);
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    auto psi = [&] {
        CVec phi = test::rand_phases(nr, rng);
        for (int i = 0; i < nr; ++i) phi(i) *= mag(rng);
        return stack_psi(test::rand_cmat(M, K, rng, mag(rng) * 2.0), phi);
    };
    in.psi0 = psi();
    in.psi = psi();
    return in;
}

}  // namespace

TEST_CASE("psi stacking") {
    CMat W(1, 1);
    W(0, 0) = 2.0;
    CVec phi(1);
    phi(0) = cplx(0.0, 1.0);
    const CVec psi = stack_psi(W, phi);
    REQUIRE(psi.size() == 2);
    CHECK(psi(0) == cplx(2.0, 0.0));
    CHECK(psi(1) == cplx(0.0, -1.0));

    std::mt19937_64 rng(1);
    const CMat W2 = test::rand_cmat(3, 2, rng);
    const CVec p2 = test::rand_cvec(5, rng);
    const auto [Wb, pb] = unstack_psi(stack_psi(W2, p2), 3, 2);
    CHECK(Wb == W2);
    CHECK(pb == p2);

    CHECK((PsiLayout{4, 4, 40}.size()) == 56);
    CHECK(stack_psi(CMat::Zero(4, 4), CVec::Zero(40)).size() == 56);
    CHECK_THROWS_AS(unstack_psi(CVec::Zero(3), 2, 2), InvalidArgument);
}

TEST_CASE("polarization and vectorization identities") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 200; ++t) {
        const CVec v1 = test::rand_cvec(6, rng), v2 = test::rand_cvec(6, rng);
        const cplx ip = v1.dot(v2);
        const cplx j(0.0, 1.0);
        const double re = 0.25 * ((v1 + v2).squaredNorm() - (v1 - v2).squaredNorm());
        const double im = 0.25 * ((v1 - j * v2).squaredNorm() - (v1 + j * v2).squaredNorm());
        CHECK(std::abs(re - ip.real()) < 1e-12);
        CHECK(std::abs(im - ip.imag()) < 1e-12);
        // first-order bound on the squared norm
        CHECK(v2.squaredNorm() >= 2.0 * v1.dot(v2).real() - v1.squaredNorm() - 1e-12);

        const CMat V1 = test::rand_cmat(3, 4, rng), V2 = test::rand_cmat(4, 2, rng);
        const CMat P = V1 * V2;
        const CVec lhs = Eigen::Map<const CVec>(P.data(), P.size());
        const CMat kr = Eigen::kroneckerProduct(V2.transpose(), CMat::Identity(3, 3));
        const CVec rhs = kr * Eigen::Map<const CVec>(V1.data(), V1.size());
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("joint quadratic minorant") {
    std::mt19937_64 rng(3);
    for (bool balance : {true, false}) {
        for (int t = 0; t < 1000; ++t) {
            const Instance in = draw(rng);
            const MinorantData m = lemma1_minorant(in.a, in.psi0, in.layout, in.Gr, balance);
            const double at0 = true_quadratic(in.a, in.psi0, in.layout, in.Gr);
            CHECK(std::abs(m.value(in.psi0) - at0) <= 1e-9 * std::max(1.0, at0));
            CHECK(std::abs(m.form().value(in.psi0) - at0) <= 1e-9 * std::max(1.0, at0));
            const double truth = true_quadratic(in.a, in.psi, in.layout, in.Gr);
            CHECK(truth - m.value(in.psi) >= -1e-9);
        }
    }
    const Instance in = draw(rng);
    const MinorantData z = lemma1_minorant(CVec::Zero(4), in.psi0, in.layout, in.Gr);
    CHECK(std::abs(z.value(in.psi)) < 1e-15);
    CHECK(std::abs(z.value(in.psi0)) < 1e-15);
    CHECK_THROWS_AS(lemma1_minorant(CVec::Zero(3), in.psi0, in.layout, in.Gr), InvalidArgument);
}

TEST_CASE("true quadratic matches dense evaluation") {
    std::mt19937_64 rng(4);
    const Instance in = draw(rng);
    const auto [W, phi] = unstack_psi(in.psi, 2, 2);
    const CMat row = in.a.adjoint() * test::diag_mat(phi) * in.Gr * W;
    CHECK(std::abs(true_quadratic(in.a, in.psi, in.layout, in.Gr) - row.squaredNorm()) < 1e-12 * row.squaredNorm());
    CHECK(std::abs(true_entry(in.a, 1, in.psi, in.layout, in.Gr) - row(0, 1)) < 1e-12 * std::abs(row(0, 1)));
}

TEST_CASE("per-stream quadratic minorant") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 1000; ++t) {
        const Instance in = draw(rng);
        const int k = t % 2;
        const MinorantData m = corollary2_minorant(in.a, k, in.psi0, in.layout, in.Gr);
        const double at0 = std::norm(true_entry(in.a, k, in.psi0, in.layout, in.Gr));
        CHECK(std::abs(m.value(in.psi0) - at0) <= 1e-9 * std::max(1.0, at0));
        const double truth = std::norm(true_entry(in.a, k, in.psi, in.layout, in.Gr));
        CHECK(truth - m.value(in.psi) >= -1e-9);
    }
    const Instance one = draw(rng, 2, 4, 1);
    const double l1 = lemma1_minorant(one.a, one.psi0, one.layout, one.Gr).value(one.psi0);
    const double c2 = corollary2_minorant(one.a, 0, one.psi0, one.layout, one.Gr).value(one.psi0);
    CHECK(std::abs(l1 - c2) <= 1e-12 * std::max(1.0, l1));
    CHECK_THROWS_AS(corollary2_minorant(one.a, 1, one.psi0, one.layout, one.Gr), InvalidArgument);
}

TEST_CASE("per-stream quadratic majorant") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 1000; ++t) {
        const Instance in = draw(rng);
        const int k = t % 2;
        const MajorantData m = lemma3_majorant(in.a, k, in.psi0, in.layout, in.Gr);
        const cplx v0 = true_entry(in.a, k, in.psi0, in.layout, in.Gr);
        const auto [r0, z0] = m.minimalSlacks(in.psi0);
        CHECK(std::abs(r0 - std::abs(v0.real())) <= 1e-9 * std::max(1.0, std::abs(v0)));
        CHECK(std::abs(z0 - std::abs(v0.imag())) <= 1e-9 * std::max(1.0, std::abs(v0)));

        const auto [r, z] = m.minimalSlacks(in.psi);
        const double truth = std::norm(true_entry(in.a, k, in.psi, in.layout, in.Gr));
        CHECK(r * r + z * z - truth >= -1e-9);
        // each constraint is convex: PSD quadratic plus affine
        for (const auto& q : m.lambda) CHECK(q.sign == 1.0);
    }
    const Instance in = draw(rng);
    const MajorantData zero = lemma3_majorant(CVec::Zero(4), 0, in.psi0, in.layout, in.Gr);
    const auto [r, z] = zero.minimalSlacks(in.psi);
    CHECK(r >= 0.0);
    CHECK(z >= 0.0);
    CHECK_THROWS_AS(lemma3_majorant(in.a, 2, in.psi0, in.layout, in.Gr), InvalidArgument);
}

TEST_CASE("combiner sensing linearization") {
    std::mt19937_64 rng(7);
    const ScenarioConfig cfg = test::unit_config(2, 2);
    auto ch = test::rand_channels(2, 3, 4, 2, 2, rng);
    const auto s = test::rand_state(2, 2, 3, 4, rng);
    const CVec uPrev = s.u;
    const auto lin = u_sensing_linearization(0, uPrev, ch, cfg, s);
    CHECK(std::abs(lin.lhs(uPrev) - std::norm(ch.ca[0].dot(uPrev))) < 1e-12);
    for (int t = 0; t < 1000; ++t) {
        const CVec u = test::rand_cvec(4, rng);
        CHECK(lin.lhs(u) <= std::norm(ch.ca[0].dot(u)) + 1e-12);
    }
    // rhs matches the SINR threshold form
    const double S = cfg.rcs[0] * effective_row(ch.cr[0], s, ch).squaredNorm() +
                     cfg.rcs[0] * cfg.detectorPower * std::norm(ch.d(0));
    const double want = cfg.gammaS[0] * (cfg.detectorPower * std::norm(ch.ea.dot(uPrev)) + cfg.noiseS) / S;
    CHECK(std::abs(lin.rhs(uPrev) - want) < 1e-12 * want);

    ch.ca[1].setZero();
    const auto dead = u_sensing_linearization(1, uPrev, ch, cfg, s);
    CHECK(dead.lhs(test::rand_cvec(4, rng)) == 0.0);
    CHECK(dead.rhs(uPrev) > 0.0);

    CHECK_THROWS_AS(u_sensing_linearization(0, CVec::Zero(4), ch, cfg, s), InvalidArgument);
}

TEST_CASE("unit-norm linearization") {
    std::mt19937_64 rng(8);
    const CVec u0 = test::rand_cvec(5, rng).normalized();
    const auto lin = unit_norm_linearization(u0);
    CHECK(std::abs(lin.lhs(u0) - lin.rhs) < 1e-14);
    CHECK(lin.rhs == doctest::Approx(2.0));
    for (int t = 0; t < 200; ++t) {
        const CVec u = test::rand_cvec(5, rng);
        // the linear form minorizes 1 + ||u||^2
        CHECK(lin.lhs(u) <= 1.0 + u.squaredNorm() + 1e-12);
    }
    CHECK_THROWS_AS(unit_norm_linearization(CVec::Zero(5)), InvalidArgument);
}

TEST_CASE("unit-modulus penalty linearization") {
    std::mt19937_64 rng(9);
    const PsiLayout L{2, 2, 4};
    const CVec prev = stack_psi(test::rand_cmat(2, 2, rng), test::rand_phases(4, rng));
    const CVec lin = penalty_linearization(prev, L);
    const double hbar = lin.dot(prev).real();
    CHECK(std::abs(2.0 * hbar - prev.tail(4).squaredNorm() - 4.0) < 1e-12);

    CVec zero = prev;
    zero.tail(4).setZero();
    CHECK(lin.dot(zero).real() == 0.0);

    for (int t = 0; t < 1000; ++t) {
        const CVec pPrev = test::rand_cvec(L.size(), rng);
        const CVec p = test::rand_cvec(L.size(), rng);
        const double h = penalty_linearization(pPrev, L).dot(p).real();
        CHECK(2.0 * h - pPrev.tail(4).squaredNorm() <= p.tail(4).squaredNorm() + 1e-12);
    }
    CHECK_THROWS_AS(penalty_linearization(CVec::Zero(3), L), InvalidArgument);
}
