// SPDX-License-Identifier: Apache-2.0
#include "risobf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace risobf {

namespace {

constexpr double kLimitGap = 1e-9;

void check_state(const BeamformingState& s, const PartitionedChannels& ch) {
    require(s.W.rows() == ch.Gr.cols(), "state: W rows must equal M");
    require(s.phi.size() == ch.Gr.rows(), "state: phi length must equal N_r");
}

// Regularized upper incomplete gamma Q(n, x) for integer n >= 1, summed in
// log space: exp(-x) * sum_{i<n} x^i / i!.
double erlang_tail(int n, double x) {
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double lx = std::log(x);
    double maxLog = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        logs[static_cast<std::size_t>(i)] = -x + i * lx - std::lgamma(i + 1.0);
        maxLog = std::max(maxLog, logs[static_cast<std::size_t>(i)]);
    }
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - maxLog);
    return std::min(1.0, std::exp(maxLog + std::log(acc)));
}

}  // namespace

CVec effective_row(const CVec& a, const BeamformingState& s, const PartitionedChannels& ch) {
    check_state(s, ch);
    require(a.size() == ch.Gr.rows(), "effective_row: channel length must equal N_r");
    const CVec v = a.conjugate().cwiseProduct(s.phi);
    return (v.transpose() * ch.Gr * s.W).transpose();
}

double interference_power(const BeamformingState& s, const PartitionedChannels& ch) {
    return effective_row(ch.er, s, ch).squaredNorm();
}

double comm_sinr(int k, const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg) {
    check_state(s, ch);
    require(k >= 0 && k < static_cast<int>(ch.hr.size()) && k < s.W.cols(), "comm_sinr: k out of range");
    const CVec hp = ch.hr[static_cast<std::size_t>(k)].cwiseProduct(s.phi);
    const CVec g = (hp.transpose() * ch.Gr * s.W).transpose();
    double interf = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (i != k) interf += std::norm(g(i));
    }
    const double leak = std::norm(hp.cwiseProduct(ch.er).sum());
    return std::norm(g(k)) / (interf + cfg.detectorPower * leak + cfg.noiseCbar[static_cast<std::size_t>(k)]);
}

std::pair<double, double> omega_params(int l, const BeamformingState& s, const PartitionedChannels& ch,
                                       const ScenarioConfig& cfg) {
    require(ch.ea.size() >= 1, "omega_params: empty absorptive set");
    require(l >= 0 && l < static_cast<int>(ch.cr.size()), "omega_params: l out of range");
    require(s.u.size() == ch.ea.size(), "omega_params: u length must equal N_a");
    const auto ul = static_cast<std::size_t>(l);
    const double rcs = cfg.rcs[ul];
    const double ue = std::norm(s.u.dot(ch.ea));
    const double uc = std::norm(s.u.dot(ch.ca[ul]));
    const double f = effective_row(ch.cr[ul], s, ch).squaredNorm();
    const double omega0 = cfg.detectorPower * ue + cfg.noiseS;
    const double omega1 = rcs * uc * f + rcs * cfg.detectorPower * std::norm(ch.d(l)) * uc + omega0;
    return {omega0, omega1};
}

double sensing_sinr_ris(int l, const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg) {
    const auto [w0, w1] = omega_params(l, s, ch, cfg);
    return (w1 - w0) / w0;
}

double detector_sinr_at(const CVec& cr, cplx d, double rcs, const BeamformingState& s, const PartitionedChannels& ch,
                        const ScenarioConfig& cfg) {
    const double f = effective_row(cr, s, ch).squaredNorm();
    const double d2 = std::norm(d);
    const double interf = interference_power(s, ch);
    return (rcs * cfg.detectorPower * d2 * d2 + rcs * d2 * f) / (interf + cfg.noiseD);
}

double sensing_sinr_detector(int l, const BeamformingState& s, const PartitionedChannels& ch,
                             const ScenarioConfig& cfg) {
    require(l >= 0 && l < static_cast<int>(ch.cr.size()), "sensing_sinr_detector: l out of range");
    const auto ul = static_cast<std::size_t>(l);
    return detector_sinr_at(ch.cr[ul], ch.d(l), cfg.rcs[ul], s, ch, cfg);
}

double max_detector_sinr(const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg) {
    double best = 0.0;
    for (int l = 0; l < static_cast<int>(ch.cr.size()); ++l) best = std::max(best, sensing_sinr_detector(l, s, ch, cfg));
    return best;
}

double detection_threshold(double omega0, double omega1) {
    require(omega0 > 0, "detection_threshold: omega0 must be > 0");
    const double t = omega1 / omega0 - 1.0;
    if (std::abs(t) <= kLimitGap) return omega0 * (1.0 + 0.5 * t);
    require(omega1 > omega0, "detection_threshold: omega1 must exceed omega0");
    return omega0 * (1.0 + t) * std::log1p(t) / t;
}

double global_threshold(const std::vector<double>& thresholds) {
    require(!thresholds.empty(), "global_threshold: empty list");
    return *std::min_element(thresholds.begin(), thresholds.end());
}

double fa_probability(double gamma) {
    require(gamma >= 0, "fa_probability: gamma must be >= 0");
    if (gamma <= kLimitGap) return std::exp(-1.0 - 0.5 * gamma);
    const double lg = std::log1p(gamma);
    return std::exp(-lg - lg / gamma);
}

double md_probability(double gamma) {
    require(gamma >= 0, "md_probability: gamma must be >= 0");
    if (gamma <= kLimitGap) return -std::expm1(-1.0 + 0.5 * gamma);
    return -std::expm1(-std::log1p(gamma) / gamma);
}

double fa_averaged(double p, int tS) {
    require(tS >= 1, "fa_averaged: tS must be >= 1");
    require(p >= 0 && p <= 1, "fa_averaged: p must lie in [0,1]");
    if (p == 0.0) return 0.0;
    return erlang_tail(tS, -tS * std::log(p));
}

double md_averaged(double q, int tS) {
    require(tS >= 1, "md_averaged: tS must be >= 1");
    require(q >= 0 && q <= 1, "md_averaged: q must lie in [0,1]");
    if (q == 1.0) return 1.0;
    return 1.0 - erlang_tail(tS, -tS * std::log1p(-q));
}

DetectionStats detection_stats(const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg) {
    DetectionStats out;
    const int L = static_cast<int>(ch.cr.size());
    for (int l = 0; l < L; ++l) {
        const auto [w0, w1] = omega_params(l, s, ch, cfg);
        out.omega0 = w0;
        out.omega1.push_back(w1);
        out.thresh.push_back(detection_threshold(w0, w1));
        const double gamma = std::max(0.0, w1 / w0 - 1.0);
        out.fa.push_back(fa_probability(gamma));
        out.md.push_back(md_probability(gamma));
        out.faAvg.push_back(fa_averaged(out.fa.back(), cfg.tS));
        out.mdAvg.push_back(md_averaged(out.md.back(), cfg.tS));
    }
    if (L > 0) out.globalThresh = global_threshold(out.thresh);
    return out;
}

}  // namespace risobf
