// SPDX-License-Identifier: Apache-2.0
#include "risobf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace risobf {

namespace {

void fill_or_broadcast(std::vector<double>& v, std::size_t size, double fallback, const char* name) {
    if (v.empty()) {
        v.assign(size, fallback);
    } else if (v.size() == 1 && size != 1) {
        v.assign(size, v.front());
    }
    require(v.size() == size, std::string(name) + ": expected " + std::to_string(size) + " entries");
}

}  // namespace

void ScenarioConfig::normalize() {
    fill_or_broadcast(rcs, static_cast<std::size_t>(L()), 0.8, "rcs");
    fill_or_broadcast(gammaS, static_cast<std::size_t>(L()), db_to_linear(7.5), "gammaS");
    fill_or_broadcast(gammaC, static_cast<std::size_t>(K), db_to_linear(7.5), "gammaC");
    fill_or_broadcast(noiseCbar, static_cast<std::size_t>(K), dbm_to_watts(-70.0), "noiseCbar");
}

void ScenarioConfig::validate() const {
    require(M >= 1 && Nx >= 1 && Ny >= 1 && K >= 1, "M, N, K must be >= 1");
    require(sensingAzPoints >= 1 && sensingElPoints >= 1, "sensing grid must be at least 1x1");
    require(static_cast<int>(rcs.size()) == L() && static_cast<int>(gammaS.size()) == L(),
            "rcs/gammaS must have L entries");
    require(static_cast<int>(gammaC.size()) == K && static_cast<int>(noiseCbar.size()) == K,
            "gammaC/noiseCbar must have K entries");
    require(pMax > 0 && detectorPower > 0 && noiseS > 0 && noiseD > 0, "powers and variances must be > 0");
    for (double v : rcs) require(v > 0, "rcs must be > 0");
    for (double v : noiseCbar) require(v > 0, "noiseCbar must be > 0");
    for (double v : gammaS) require(v >= 0, "gammaS must be >= 0");
    for (double v : gammaC) require(v >= 0, "gammaC must be >= 0");
    require(ricianK >= 0, "ricianK must be >= 0");
    require(refGain > 0 && wavelength > 0, "refGain and wavelength must be > 0");
    require(tS >= 1, "tS must be >= 1");
    require(initialReflectRatio > 0 && initialReflectRatio < 1, "initialReflectRatio must lie in (0,1)");
    require(geometry.sensingRange > 0 && geometry.detector.range > 0, "ranges must be > 0");
}

ScenarioConfig default_config() {
    ScenarioConfig cfg;
    cfg.normalize();
    return cfg;
}

// ---------------------------------------------------------------------------
// ElementPartition

ElementPartition::ElementPartition(int n, std::vector<int> reflecting) : n_(n), reflecting_(std::move(reflecting)) {
    require(n >= 1, "partition: N must be >= 1");
    std::sort(reflecting_.begin(), reflecting_.end());
    require(std::adjacent_find(reflecting_.begin(), reflecting_.end()) == reflecting_.end(),
            "partition: duplicate reflecting index");
    for (int idx : reflecting_) require(idx >= 0 && idx < n, "partition: index out of range");
    absorptive_.reserve(static_cast<std::size_t>(n) - reflecting_.size());
    std::size_t j = 0;
    for (int i = 0; i < n; ++i) {
        if (j < reflecting_.size() && reflecting_[j] == i) {
            ++j;
        } else {
            absorptive_.push_back(i);
        }
    }
}

ElementPartition ElementPartition::leading(int n, int nr) {
    require(nr >= 0 && nr <= n, "partition: nr out of range");
    std::vector<int> r(static_cast<std::size_t>(nr));
    for (int i = 0; i < nr; ++i) r[static_cast<std::size_t>(i)] = i;
    return ElementPartition(n, std::move(r));
}

void ElementPartition::promoteToReflecting(const std::vector<int>& elements) {
    for (int idx : elements) {
        require(std::binary_search(absorptive_.begin(), absorptive_.end(), idx),
                "partition: element is not absorptive");
    }
    std::vector<int> r = reflecting_;
    r.insert(r.end(), elements.begin(), elements.end());
    *this = ElementPartition(n_, std::move(r));
}

bool ElementPartition::isValid() const {
    if (static_cast<int>(reflecting_.size() + absorptive_.size()) != n_) return false;
    if (!std::is_sorted(reflecting_.begin(), reflecting_.end())) return false;
    if (!std::is_sorted(absorptive_.begin(), absorptive_.end())) return false;
    std::vector<int> all = reflecting_;
    all.insert(all.end(), absorptive_.begin(), absorptive_.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < n_; ++i) {
        if (all[static_cast<std::size_t>(i)] != i) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Geometry helpers

double distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Vec3 point_from_direction(const Vec3& origin, const Direction& dir) {
    const double s = std::sin(dir.elevation);
    return {origin[0] + dir.range * s * std::cos(dir.azimuth), origin[1] + dir.range * s * std::sin(dir.azimuth),
            origin[2] + dir.range * std::cos(dir.elevation)};
}

Direction direction_to(const Vec3& origin, const Vec3& target) {
    const double dx = target[0] - origin[0], dy = target[1] - origin[1], dz = target[2] - origin[2];
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    require(r > 0, "direction_to: coincident points");
    return {std::atan2(dy, dx), std::acos(std::clamp(dz / r, -1.0, 1.0)), r};
}

CVec steering_vector(double azimuth, double elevation, int nx, int ny) {
    require(nx >= 1 && ny >= 1, "steering_vector: grid dims must be >= 1");
    const double ux = std::cos(azimuth) * std::sin(elevation);
    const double uy = std::sin(azimuth) * std::sin(elevation);
    CVec a(nx * ny);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            a(ix + nx * iy) = std::polar(1.0, kPi * (ix * ux + iy * uy));
        }
    }
    return a;
}

double path_amplitude(double dist, const ScenarioConfig& cfg) {
    require(dist > 0, "path gain: distance must be > 0");
    return std::sqrt(cfg.refGain * std::pow(dist, -cfg.pathlossExp));
}

CVec los_channel(double dist, double azimuth, double elevation, const ScenarioConfig& cfg) {
    const cplx alpha = std::polar(path_amplitude(dist, cfg), -2.0 * kPi * dist / cfg.wavelength);
    return alpha * steering_vector(azimuth, elevation, cfg.Nx, cfg.Ny);
}

CMat rician_channel(int rows, int cols, const CMat& losComponent, double ricianK, double gain,
                    std::mt19937_64& rng) {
    require(losComponent.rows() == rows && losComponent.cols() == cols, "rician_channel: dimension mismatch");
    require(ricianK >= 0, "rician_channel: ricianK must be >= 0");
    require(gain >= 0, "rician_channel: gain must be >= 0");
    const double amp = std::sqrt(gain);
    if (std::isinf(ricianK)) return amp * losComponent;
    const double wLos = std::sqrt(ricianK / (1.0 + ricianK));
    const double wNlos = std::sqrt(1.0 / (1.0 + ricianK));
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    CMat out(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            out(i, j) = amp * (wLos * losComponent(i, j) + wNlos * cplx(re, im));
        }
    }
    return out;
}

PartitionedChannels partition_channels(const ChannelSet& ch, const ElementPartition& p) {
    const int n = static_cast<int>(ch.e.size());
    require(p.total() == n && p.isValid(), "partition_channels: partition does not match the surface");
    const auto& R = p.reflecting();
    const auto& A = p.absorptive();
    auto pick = [](const CVec& v, const std::vector<int>& idx) {
        CVec out(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
        return out;
    };
    PartitionedChannels pc;
    pc.Gr.resize(static_cast<Eigen::Index>(R.size()), ch.G.cols());
    for (std::size_t i = 0; i < R.size(); ++i) pc.Gr.row(static_cast<Eigen::Index>(i)) = ch.G.row(R[i]);
    for (const auto& hk : ch.h) pc.hr.push_back(pick(hk, R));
    for (const auto& cl : ch.c) {
        pc.cr.push_back(pick(cl, R));
        pc.ca.push_back(pick(cl, A));
    }
    pc.er = pick(ch.e, R);
    pc.ea = pick(ch.e, A);
    pc.d = ch.d;
    return pc;
}

std::vector<Direction> sensing_grid(const ScenarioConfig& cfg, int azPoints, int elPoints) {
    require(azPoints >= 1 && elPoints >= 1, "sensing_grid: grid dims must be >= 1");
    const auto& g = cfg.geometry;
    auto axis = [](double lo, double hi, int count, int i) {
        if (count == 1) return 0.5 * (lo + hi);
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    };
    std::vector<Direction> pts;
    pts.reserve(static_cast<std::size_t>(azPoints * elPoints));
    for (int ie = 0; ie < elPoints; ++ie) {
        for (int ia = 0; ia < azPoints; ++ia) {
            pts.push_back({axis(g.sensingAzMin, g.sensingAzMax, azPoints, ia),
                           axis(g.sensingElMin, g.sensingElMax, elPoints, ie), g.sensingRange});
        }
    }
    return pts;
}

std::vector<Direction> sensing_grid(const ScenarioConfig& cfg) {
    return sensing_grid(cfg, cfg.sensingAzPoints, cfg.sensingElPoints);
}

PointChannels point_channels(const Direction& point, const ScenarioConfig& cfg) {
    const auto& g = cfg.geometry;
    const Vec3 target = point_from_direction(g.ris, point);
    const Vec3 det = point_from_direction(g.ris, g.detector);
    const double dd = distance(det, target);
    PointChannels out;
    out.c = los_channel(point.range, point.azimuth, point.elevation, cfg);
    out.d = std::polar(path_amplitude(dd, cfg), -2.0 * kPi * dd / cfg.wavelength);
    return out;
}

Scenario build_scenario(const ScenarioConfig& cfgIn) {
    ScenarioConfig cfg = cfgIn;
    cfg.normalize();
    cfg.validate();
    const auto& g = cfg.geometry;
    const int n = cfg.N();

    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu), static_cast<std::uint32_t>(cfg.seed >> 32)};
    std::mt19937_64 rng(seq);

    Scenario sc;
    ChannelSet& ch = sc.channels;

    // BS -> RIS: planar response at the RIS times a ULA (along y) response at the BS.
    const Direction risToBs = direction_to(g.ris, g.bs);
    const Direction bsToRis = direction_to(g.bs, g.ris);
    const double uyBs = std::sin(bsToRis.azimuth) * std::sin(bsToRis.elevation);
    CVec aBs(cfg.M);
    for (int m = 0; m < cfg.M; ++m) aBs(m) = std::polar(1.0, kPi * m * uyBs);
    const CVec aRisBs = steering_vector(risToBs.azimuth, risToBs.elevation, cfg.Nx, cfg.Ny);
    const CMat losG = std::polar(1.0, -2.0 * kPi * risToBs.range / cfg.wavelength) * (aRisBs * aBs.transpose());
    ch.G = rician_channel(n, cfg.M, losG, cfg.ricianK, cfg.refGain * std::pow(risToBs.range, -cfg.pathlossExp), rng);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < cfg.K; ++k) {
        Vec3 pos;
        for (int a = 0; a < 3; ++a) pos[a] = g.userBoxMin[a] + (g.userBoxMax[a] - g.userBoxMin[a]) * unif(rng);
        sc.userPositions.push_back(pos);
        const Direction dir = direction_to(g.ris, pos);
        const CMat los = std::polar(1.0, -2.0 * kPi * dir.range / cfg.wavelength) *
                         steering_vector(dir.azimuth, dir.elevation, cfg.Nx, cfg.Ny);
        ch.h.push_back(
            rician_channel(n, 1, los, cfg.ricianK, cfg.refGain * std::pow(dir.range, -cfg.pathlossExp), rng).col(0));
    }

    sc.sensingPoints = sensing_grid(cfg);
    ch.d.resize(cfg.L());
    for (int l = 0; l < cfg.L(); ++l) {
        const PointChannels pcl = point_channels(sc.sensingPoints[static_cast<std::size_t>(l)], cfg);
        ch.c.push_back(pcl.c);
        ch.d(l) = pcl.d;
    }
    ch.e = los_channel(g.detector.range, g.detector.azimuth, g.detector.elevation, cfg);

    sc.partition = initial_partition(cfg);
    return sc;
}

ElementPartition initial_partition(const ScenarioConfig& cfg) {
    const int n = cfg.N();
    require(n >= 2, "initial_partition: need at least two elements");
    const int nr = static_cast<int>(std::ceil(cfg.initialReflectRatio * n - 1e-9));
    return ElementPartition::leading(n, std::clamp(nr, 1, n - 1));
}

}  // namespace risobf
