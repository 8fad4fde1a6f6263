// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risobf/metrics.hpp"
#include "risobf/surrogates.hpp"

#include <random>

namespace risobf::test {

inline CVec rand_cvec(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    CVec v(n);
    for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
    return v;
}

inline CMat rand_cmat(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    CMat m(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

inline CVec rand_phases(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    CVec v(n);
    for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, u(rng));
    return v;
}

// Random partitioned channels with unit-scale entries.
inline PartitionedChannels rand_channels(int M, int nr, int na, int K, int L, std::mt19937_64& rng) {
    PartitionedChannels ch;
    ch.Gr = rand_cmat(nr, M, rng);
    for (int k = 0; k < K; ++k) ch.hr.push_back(rand_cvec(nr, rng));
    for (int l = 0; l < L; ++l) {
        ch.cr.push_back(rand_cvec(nr, rng));
        ch.ca.push_back(rand_cvec(na, rng));
    }
    ch.er = rand_cvec(nr, rng);
    ch.ea = rand_cvec(na, rng);
    ch.d = rand_cvec(L, rng);
    return ch;
}

inline BeamformingState rand_state(int M, int K, int nr, int na, std::mt19937_64& rng) {
    BeamformingState s;
    s.W = rand_cmat(M, K, rng);
    s.phi = rand_phases(nr, rng);
    s.u = rand_cvec(na, rng);
    if (na > 0) s.u.normalize();
    return s;
}

// Config with unit-ish physical parameters for dense-arithmetic checks.
inline ScenarioConfig unit_config(int K, int L) {
    ScenarioConfig cfg;
    cfg.K = K;
    cfg.sensingAzPoints = L;
    cfg.sensingElPoints = 1;
    cfg.detectorPower = 0.7;
    cfg.noiseS = 0.3;
    cfg.noiseD = 0.2;
    cfg.rcs.assign(static_cast<std::size_t>(L), 1.3);
    cfg.gammaS.assign(static_cast<std::size_t>(L), 1.0);
    cfg.gammaC.assign(static_cast<std::size_t>(K), 1.0);
    cfg.noiseCbar.assign(static_cast<std::size_t>(K), 0.4);
    return cfg;
}

// Desk-scale scenario: M antennas, 4x4 surface, K users, 2x2 sensing grid.
inline ScenarioConfig desk_config(int M, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.M = M;
    cfg.Nx = 4;
    cfg.Ny = 4;
    cfg.K = 2;
    cfg.sensingAzPoints = 2;
    cfg.sensingElPoints = 2;
    cfg.seed = seed;
    cfg.normalize();
    return cfg;
}

// Dense Phi = diag(phi).
inline CMat diag_mat(const CVec& v) { return v.asDiagonal(); }

}  // namespace risobf::test
