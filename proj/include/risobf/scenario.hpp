// SPDX-License-Identifier: Apache-2.0
//
// Geometry, path gains, steering vectors and channel synthesis for the
// RIS-assisted ISAC link, plus the reflecting/absorptive views of every
// RIS-side channel.
#pragma once

#include "risobf/types.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace risobf {

using Vec3 = std::array<double, 3>;

/// Direction of a point as seen from the RIS reference element.
struct Direction {
    double azimuth = 0.0;    // radians, in the RIS plane
    double elevation = 0.0;  // radians, measured from the RIS normal
    double range = 0.0;      // metres
};

struct Geometry {
    Vec3 bs{0.0, 0.0, 0.0};
    Vec3 ris{10.0, 0.0, 0.0};
    Vec3 userBoxMin{7.5, 10.0, 0.0};
    Vec3 userBoxMax{12.5, 15.0, 2.0};
    Direction detector{deg_to_rad(60.0), deg_to_rad(80.0), 8.0};
    double sensingRange = 8.0;
    double sensingAzMin = deg_to_rad(45.0);
    double sensingAzMax = deg_to_rad(55.0);
    double sensingElMin = deg_to_rad(75.0);
    double sensingElMax = deg_to_rad(85.0);
};

/// All physical and algorithmic scenario parameters. Defaults reproduce the
/// full-scale simulation setup (M=4, N=64, K=4, L=9).
struct ScenarioConfig {
    int M = 4;
    int Nx = 8;
    int Ny = 8;
    int K = 4;
    int sensingAzPoints = 3;
    int sensingElPoints = 3;

    double pMax = dbm_to_watts(40.0);
    double detectorPower = dbm_to_watts(30.0);  // rho^2
    std::vector<double> rcs;                     // varsigma_l^2, size L
    std::vector<double> gammaS;                  // linear, size L
    std::vector<double> gammaC;                  // linear, size K
    double noiseS = dbm_to_watts(-70.0);
    double noiseD = dbm_to_watts(-70.0);
    std::vector<double> noiseCbar;               // size K, already includes detector interference moments

    double ricianK = db_to_linear(3.0);
    double pathlossExp = 2.0;
    double refGain = db_to_linear(-30.0);
    double wavelength = 0.1;

    Geometry geometry;
    int tS = 10;
    double initialReflectRatio = 0.625;
    std::uint64_t seed = 1;

    int N() const { return Nx * Ny; }
    int L() const { return sensingAzPoints * sensingElPoints; }

    /// Fills the per-location / per-user vectors with the default values when
    /// they are empty and resizes them when a single value was given.
    void normalize();
    /// Throws InvalidArgument when an invariant is violated.
    void validate() const;
};

/// Defaults with per-location and per-user vectors populated.
ScenarioConfig default_config();

/// Index sets of reflecting (R) and absorptive (A) RIS elements, 0-based and
/// kept in ascending order.
class ElementPartition {
  public:
    ElementPartition() = default;
    ElementPartition(int n, std::vector<int> reflecting);

    /// R = {0, ..., nr-1}.
    static ElementPartition leading(int n, int nr);

    int total() const { return n_; }
    const std::vector<int>& reflecting() const { return reflecting_; }
    const std::vector<int>& absorptive() const { return absorptive_; }
    int numReflecting() const { return static_cast<int>(reflecting_.size()); }
    int numAbsorptive() const { return static_cast<int>(absorptive_.size()); }

    /// Moves the given elements (indices into the whole surface) from A to R.
    void promoteToReflecting(const std::vector<int>& elements);
    /// True when R and A form a disjoint ascending cover of {0..N-1}.
    bool isValid() const;

    bool operator==(const ElementPartition&) const = default;

  private:
    int n_ = 0;
    std::vector<int> reflecting_;
    std::vector<int> absorptive_;
};

struct ChannelSet {
    CMat G;               // N x M, BS -> RIS
    std::vector<CVec> h;  // K x (N), RIS -> user k
    std::vector<CVec> c;  // L x (N), RIS -> location l (LoS)
    CVec e;               // N, RIS -> detector (LoS)
    CVec d;               // L, detector -> location l (LoS)
};

struct PartitionedChannels {
    CMat Gr;
    std::vector<CVec> hr;
    std::vector<CVec> cr;
    std::vector<CVec> ca;
    CVec er;
    CVec ea;
    CVec d;
};

struct Scenario {
    ChannelSet channels;
    ElementPartition partition;
    std::vector<Direction> sensingPoints;
    std::vector<Vec3> userPositions;
};

/// UPA response for element (nx, ny), flattened column-major over (nx, ny):
/// index = nx + Nx * ny.
CVec steering_vector(double azimuth, double elevation, int nx, int ny);

/// alpha * a(az, el) with |alpha|^2 = refGain * distance^-exp and phase
/// -2 pi distance / wavelength.
CVec los_channel(double distance, double azimuth, double elevation, const ScenarioConfig& cfg);

/// Amplitude of the LoS path gain at the given distance.
double path_amplitude(double distance, const ScenarioConfig& cfg);

/// sqrt(gain) * (sqrt(k/(1+k)) los + sqrt(1/(1+k)) nlos), nlos ~ CN(0, 1).
/// ricianK = +inf returns the scaled LoS component exactly.
CMat rician_channel(int rows, int cols, const CMat& losComponent, double ricianK, double gain,
                    std::mt19937_64& rng);

PartitionedChannels partition_channels(const ChannelSet& channels, const ElementPartition& partition);

Vec3 point_from_direction(const Vec3& origin, const Direction& dir);
Direction direction_to(const Vec3& origin, const Vec3& target);
double distance(const Vec3& a, const Vec3& b);

/// Uniform az x el sampling of the configured sensing rectangle; a single
/// point along an axis sits at the centre of that axis.
std::vector<Direction> sensing_grid(const ScenarioConfig& cfg);
std::vector<Direction> sensing_grid(const ScenarioConfig& cfg, int azPoints, int elPoints);

/// LoS channels (RIS->point, detector->point) for an arbitrary point.
struct PointChannels {
    CVec c;
    cplx d;
};
PointChannels point_channels(const Direction& point, const ScenarioConfig& cfg);

/// R = {0..ceil(ratio*N)-1}, clamped so both sets are nonempty.
ElementPartition initial_partition(const ScenarioConfig& cfg);

/// Draws one realization: Rician G and h_k, LoS c_l, e, d_l, users uniform in
/// the configured box, initial partition R = {0..ceil(ratio*N)-1}.
Scenario build_scenario(const ScenarioConfig& cfg);

}  // namespace risobf
