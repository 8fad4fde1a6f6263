// SPDX-License-Identifier: Apache-2.0
//
// SINRs, detection thresholds and FA/MD probabilities.
#pragma once

#include "risobf/scenario.hpp"

#include <utility>
#include <vector>

namespace risobf {

struct BeamformingState {
    CMat W;    // M x K
    CVec phi;  // diag of Phi over R
    CVec u;    // combiner over A
};

struct DetectionStats {
    double omega0 = 0.0;
    std::vector<double> omega1;
    std::vector<double> thresh;
    double globalThresh = 0.0;
    std::vector<double> fa, md;
    std::vector<double> faAvg, mdAvg;
};

/// a^H Phi G_r W as a row (returned as a column vector of length K).
CVec effective_row(const CVec& a, const BeamformingState& s, const PartitionedChannels& ch);

/// ||e_r^H Phi G_r W||^2, the power the RIS steers toward the detector.
double interference_power(const BeamformingState& s, const PartitionedChannels& ch);

double comm_sinr(int k, const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg);
double sensing_sinr_ris(int l, const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg);
double sensing_sinr_detector(int l, const BeamformingState& s, const PartitionedChannels& ch,
                             const ScenarioConfig& cfg);

/// Detector-side SINR for an arbitrary point with RIS channel cr (over R),
/// detector channel d and cross section rcs.
double detector_sinr_at(const CVec& cr, cplx d, double rcs, const BeamformingState& s, const PartitionedChannels& ch,
                        const ScenarioConfig& cfg);

double max_detector_sinr(const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg);

/// (omega0, omega1) for location l.
std::pair<double, double> omega_params(int l, const BeamformingState& s, const PartitionedChannels& ch,
                                       const ScenarioConfig& cfg);

double detection_threshold(double omega0, double omega1);
double global_threshold(const std::vector<double>& thresholds);

double fa_probability(double gamma);
double md_probability(double gamma);
double fa_averaged(double p, int tS);
double md_averaged(double q, int tS);

DetectionStats detection_stats(const BeamformingState& s, const PartitionedChannels& ch, const ScenarioConfig& cfg);

}  // namespace risobf
