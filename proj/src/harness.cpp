// SPDX-License-Identifier: Apache-2.0
#include "risobf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

namespace risobf {

namespace {

constexpr long long kOracleBlock = 8192;

struct Job {
    std::size_t point = 0;
    int realization = 0;
};

std::vector<double> sweep_points(const ExperimentSpec& spec) {
    if (spec.sweepParam == SweepParam::None) return {0.0};
    return spec.sweepValues;
}

RealizationOutcome summarize(const RunResult& r, std::uint64_t seed) {
    RealizationOutcome o;
    o.seed = seed;
    o.feasible = r.initFeasible;
    o.converged = r.converged;
    o.constraintsOk = r.report.ok();
    o.maxDetectorSinrDb = r.maxDetectorSinr > 0.0 ? linear_to_db(r.maxDetectorSinr) : -std::numeric_limits<double>::infinity();
    o.interference = r.interference;
    o.nr = r.partition.numReflecting();
    o.outerIterations = r.outerIterations;
    return o;
}

PointAggregate aggregate(double value, const ModeSpec& m, std::vector<RealizationOutcome> runs) {
    PointAggregate a;
    a.sweepValue = value;
    a.label = m.name();
    a.mode = m.mode;
    a.realizations = static_cast<int>(runs.size());
    double s = 0.0, s2 = 0.0, si = 0.0, snr = 0.0;
    for (const auto& r : runs) {
        a.converged += r.converged ? 1 : 0;
        if (!r.feasible) continue;
        ++a.feasible;
        s += r.maxDetectorSinrDb;
        s2 += r.maxDetectorSinrDb * r.maxDetectorSinrDb;
        si += r.interference;
        snr += r.nr;
    }
    if (a.feasible > 0) {
        const double n = a.feasible;
        a.meanDetectorSinrDb = s / n;
        a.meanInterference = si / n;
        a.meanNr = snr / n;
        if (a.feasible > 1) {
            const double var = std::max(0.0, (s2 - n * a.meanDetectorSinrDb * a.meanDetectorSinrDb) / (n - 1.0));
            a.ci95Db = 1.96 * std::sqrt(var / n);
        }
    } else {
        a.meanDetectorSinrDb = std::numeric_limits<double>::quiet_NaN();
    }
    a.runs = std::move(runs);
    return a;
}

AggregateResult collect(const ExperimentSpec& spec, const std::vector<double>& values,
                        const std::vector<std::vector<RealizationOutcome>>& perJob) {
    AggregateResult out;
    out.sweepParam = spec.sweepParam;
    const std::size_t nm = spec.modes.size();
    const auto nreal = static_cast<std::size_t>(spec.realizations);
    for (std::size_t p = 0; p < values.size(); ++p) {
        for (std::size_t m = 0; m < nm; ++m) {
            std::vector<RealizationOutcome> runs;
            runs.reserve(nreal);
            for (std::size_t i = 0; i < nreal; ++i) runs.push_back(perJob[p * nreal + i][m]);
            out.points.push_back(aggregate(values[p], spec.modes[m], std::move(runs)));
        }
    }
    return out;
}

std::vector<RealizationOutcome> run_job(const ExperimentSpec& spec, const std::vector<double>& values, const Job& j) {
    ScenarioConfig cfg = apply_sweep(spec.scenario, spec.sweepParam, values[j.point]);
    cfg.seed = realization_seed(spec.scenario, j.realization);
    return run_realization(cfg, spec.settings, spec.modes);
}

// Energy test on tS exponential samples, count trials from the stream of one block.
void oracle_block(double omega0, double omega1, double threshold, int tS, long long count, std::uint64_t seed,
                  long long block, long long& fa, long long& md) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block & 0xffffffff), static_cast<std::uint32_t>(block >> 32)};
    std::mt19937_64 rng(seq);
    std::exponential_distribution<double> e0(1.0 / omega0), e1(1.0 / omega1);
    const double limit = threshold * tS;
    for (long long t = 0; t < count; ++t) {
        double a = 0.0, b = 0.0;
        for (int i = 0; i < tS; ++i) a += e0(rng);
        for (int i = 0; i < tS; ++i) b += e1(rng);
        if (a > limit) ++fa;
        if (b <= limit) ++md;
    }
}

OracleResult oracle_finish(long long trials, long long fa, long long md) {
    OracleResult r;
    r.trials = trials;
    const double n = static_cast<double>(trials);
    r.pHat = static_cast<double>(fa) / n;
    r.qHat = static_cast<double>(md) / n;
    r.pSigma = std::sqrt(r.pHat * (1.0 - r.pHat) / n);
    r.qSigma = std::sqrt(r.qHat * (1.0 - r.qHat) / n);
    return r;
}

void check_oracle_args(double omega0, double omega1, int tS, long long trials) {
    require(omega0 > 0 && omega1 > 0, "detection_oracle: omegas must be > 0");
    require(tS >= 1, "detection_oracle: tS must be >= 1");
    require(trials >= 1, "detection_oracle: trials must be >= 1");
}

PartitionedChannels point_view(const PointChannels& pc, const ElementPartition& part) {
    PartitionedChannels v;
    CVec cr(part.numReflecting());
    for (int i = 0; i < part.numReflecting(); ++i) cr(i) = pc.c(part.reflecting()[static_cast<std::size_t>(i)]);
    v.cr.push_back(cr);
    return v;
}

HeatmapResult heatmap_setup(const ScenarioConfig& cfg, const HeatmapGrid& grid) {
    require(grid.azPoints >= 1 && grid.elPoints >= 1, "heatmap: grid dims must be >= 1");
    HeatmapResult h;
    const auto pts = sensing_grid(cfg, grid.azPoints, grid.elPoints);
    for (int ia = 0; ia < grid.azPoints; ++ia) h.azimuthDeg.push_back(pts[static_cast<std::size_t>(ia)].azimuth * 180.0 / kPi);
    for (int ie = 0; ie < grid.elPoints; ++ie) {
        h.elevationDeg.push_back(pts[static_cast<std::size_t>(ie * grid.azPoints)].elevation * 180.0 / kPi);
    }
    h.gammaD = RMat::Zero(grid.elPoints, grid.azPoints);
    h.fa = h.gammaD;
    h.md = h.gammaD;
    return h;
}

void heatmap_point(HeatmapResult& h, int idx, const Direction& pt, const BeamformingState& s,
                   const PartitionedChannels& ch, const ElementPartition& part, const ScenarioConfig& cfg,
                   const HeatmapGrid& grid, int tS) {
    const PointChannels pc = point_channels(pt, cfg);
    const PartitionedChannels v = point_view(pc, part);
    const double g = detector_sinr_at(v.cr[0], pc.d, cfg.rcs.front(), s, ch, cfg);
    const int ie = idx / grid.azPoints, ia = idx % grid.azPoints;
    h.gammaD(ie, ia) = g;
    h.fa(ie, ia) = fa_averaged(fa_probability(g), tS);
    h.md(ie, ia) = md_averaged(md_probability(g), tS);
}

}  // namespace

std::string ModeSpec::name() const { return label.empty() ? std::string(to_string(mode)) : label; }

const char* to_string(SweepParam p) {
    switch (p) {
        case SweepParam::None: return "none";
        case SweepParam::PMaxDbm: return "p_max_dbm";
        case SweepParam::GammaCDb: return "gamma_c_db";
        case SweepParam::GammaSDb: return "gamma_s_db";
        case SweepParam::N: return "n";
    }
    return "unknown";
}

SweepParam parse_sweep_param(const std::string& s) {
    if (s == "none" || s.empty()) return SweepParam::None;
    if (s == "p_max_dbm" || s == "pmax") return SweepParam::PMaxDbm;
    if (s == "gamma_c_db" || s == "gammac") return SweepParam::GammaCDb;
    if (s == "gamma_s_db" || s == "gammas") return SweepParam::GammaSDb;
    if (s == "n" || s == "N") return SweepParam::N;
    throw InvalidArgument("unknown sweep parameter '" + s + "'");
}

void ExperimentSpec::validate() const {
    require(realizations >= 1, "experiment: realizations must be >= 1");
    require(!modes.empty(), "experiment: at least one mode is required");
    for (const auto& m : modes) {
        if (m.reflectRatio) require(*m.reflectRatio > 0 && *m.reflectRatio < 1, "experiment: reflect ratio must lie in (0,1)");
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        for (std::size_t j = i + 1; j < modes.size(); ++j) {
            require(modes[i].name() != modes[j].name(), "experiment: duplicate mode label '" + modes[i].name() + "'");
        }
    }
    if (sweepParam != SweepParam::None) {
        require(!sweepValues.empty(), "experiment: sweep needs values");
        for (std::size_t i = 1; i < sweepValues.size(); ++i) {
            require(sweepValues[i] > sweepValues[i - 1], "experiment: sweep values must be strictly increasing");
        }
    }
    require(heatmap.azPoints >= 1 && heatmap.elPoints >= 1, "experiment: heatmap grid must be at least 1x1");
    settings.validate();
    ScenarioConfig c = scenario;
    c.normalize();
    c.validate();
}

ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepParam p, double value) {
    ScenarioConfig cfg = base;
    cfg.normalize();
    switch (p) {
        case SweepParam::None: break;
        case SweepParam::PMaxDbm: cfg.pMax = dbm_to_watts(value); break;
        case SweepParam::GammaCDb: std::fill(cfg.gammaC.begin(), cfg.gammaC.end(), db_to_linear(value)); break;
        case SweepParam::GammaSDb: std::fill(cfg.gammaS.begin(), cfg.gammaS.end(), db_to_linear(value)); break;
        case SweepParam::N: {
            const int n = static_cast<int>(std::lround(value));
            require(n >= 2 && std::abs(value - n) < 1e-9, "sweep: N must be an integer >= 2");
            int ny = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
            while (n % ny != 0) --ny;
            cfg.Ny = ny;
            cfg.Nx = n / ny;
            break;
        }
    }
    return cfg;
}

std::uint64_t realization_seed(const ScenarioConfig& cfg, int i) { return cfg.seed + static_cast<std::uint64_t>(i); }

std::vector<RealizationOutcome> run_realization(const ScenarioConfig& cfg, const AlgorithmSettings& st,
                                                const std::vector<ModeSpec>& modes) {
    std::vector<RealizationOutcome> out;
    Scenario sc;
    std::string drawError;
    try {
        sc = build_scenario(cfg);
    } catch (const std::exception& e) {
        drawError = e.what();
    }
    for (const auto& m : modes) {
        RealizationOutcome o;
        o.seed = cfg.seed;
        if (!drawError.empty()) {
            o.error = drawError;
            out.push_back(o);
            continue;
        }
        try {
            ScenarioConfig mc = cfg;
            if (m.reflectRatio) mc.initialReflectRatio = *m.reflectRatio;
            Scenario ms = sc;
            ms.partition = initial_partition(mc);
            o = summarize(run_on_scenario(ms, mc, st, m.mode), cfg.seed);
        } catch (const std::exception& e) {
            o.feasible = false;
            o.error = e.what();
        }
        out.push_back(o);
    }
    return out;
}

AggregateResult run_experiment_serial(const ExperimentSpec& spec) {
    spec.validate();
    const std::vector<double> values = sweep_points(spec);
    const int total = static_cast<int>(values.size()) * spec.realizations;
    std::vector<std::vector<RealizationOutcome>> perJob(static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t) {
        const Job j{static_cast<std::size_t>(t / spec.realizations), t % spec.realizations};
        perJob[static_cast<std::size_t>(t)] = run_job(spec, values, j);
    }
    return collect(spec, values, perJob);
}

AggregateResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const std::vector<double> values = sweep_points(spec);
    const int total = static_cast<int>(values.size()) * spec.realizations;
    std::vector<std::vector<RealizationOutcome>> perJob(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < total; ++t) {
        const Job j{static_cast<std::size_t>(t / spec.realizations), t % spec.realizations};
        perJob[static_cast<std::size_t>(t)] = run_job(spec, values, j);
    }
    return collect(spec, values, perJob);
}

AggregateResult sweep(const ExperimentSpec& spec) {
    require(spec.sweepParam != SweepParam::None, "sweep: no sweep parameter set");
    return run_experiment(spec);
}

const PointAggregate& AggregateResult::at(double sweepValue, const std::string& label) const {
    for (const auto& p : points) {
        if (p.label == label && p.sweepValue == sweepValue) return p;
    }
    throw InvalidArgument("aggregate: no point for label '" + label + "'");
}

HeatmapResult heatmap_serial(const BeamformingState& s, const ChannelSet& full, const ElementPartition& part,
                             const ScenarioConfig& cfgIn, const HeatmapGrid& grid, int tS) {
    ScenarioConfig cfg = cfgIn;
    cfg.normalize();
    HeatmapResult h = heatmap_setup(cfg, grid);
    const PartitionedChannels ch = partition_channels(full, part);
    const auto pts = sensing_grid(cfg, grid.azPoints, grid.elPoints);
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        heatmap_point(h, i, pts[static_cast<std::size_t>(i)], s, ch, part, cfg, grid, tS);
    }
    return h;
}

HeatmapResult heatmap(const BeamformingState& s, const ChannelSet& full, const ElementPartition& part,
                      const ScenarioConfig& cfgIn, const HeatmapGrid& grid, int tS) {
    ScenarioConfig cfg = cfgIn;
    cfg.normalize();
    HeatmapResult h = heatmap_setup(cfg, grid);
    const PartitionedChannels ch = partition_channels(full, part);
    const auto pts = sensing_grid(cfg, grid.azPoints, grid.elPoints);
    const int n = static_cast<int>(pts.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) heatmap_point(h, i, pts[static_cast<std::size_t>(i)], s, ch, part, cfg, grid, tS);
    return h;
}

OracleResult detection_oracle_serial(double omega0, double omega1, double threshold, int tS, long long trials,
                                     std::uint64_t seed) {
    check_oracle_args(omega0, omega1, tS, trials);
    const long long blocks = (trials + kOracleBlock - 1) / kOracleBlock;
    long long fa = 0, md = 0;
    for (long long b = 0; b < blocks; ++b) {
        const long long count = std::min(kOracleBlock, trials - b * kOracleBlock);
        oracle_block(omega0, omega1, threshold, tS, count, seed, b, fa, md);
    }
    return oracle_finish(trials, fa, md);
}

OracleResult detection_oracle(double omega0, double omega1, double threshold, int tS, long long trials,
                              std::uint64_t seed) {
    check_oracle_args(omega0, omega1, tS, trials);
    const long long blocks = (trials + kOracleBlock - 1) / kOracleBlock;
    long long fa = 0, md = 0;
#pragma omp parallel for schedule(static) reduction(+ : fa, md)
    for (long long b = 0; b < blocks; ++b) {
        const long long count = std::min(kOracleBlock, trials - b * kOracleBlock);
        oracle_block(omega0, omega1, threshold, tS, count, seed, b, fa, md);
    }
    return oracle_finish(trials, fa, md);
}

void write_aggregate_csv(const AggregateResult& r, std::ostream& os) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(6);
    os << "sweep_param,sweep_value,label,mode,realizations,feasible,converged,mean_max_det_sinr_db,ci95_db,"
          "mean_interference,mean_nr\n";
    for (const auto& p : r.points) {
        os << to_string(r.sweepParam) << ',' << p.sweepValue << ',' << p.label << ',' << to_string(p.mode) << ','
           << p.realizations << ',' << p.feasible << ',' << p.converged << ',' << p.meanDetectorSinrDb << ','
           << p.ci95Db << ',' << p.meanInterference << ',' << p.meanNr << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

void write_heatmap_csv(const HeatmapResult& h, const RMat& values, std::ostream& os) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(6);
    os << "elevation_deg\\azimuth_deg";
    for (double a : h.azimuthDeg) os << ',' << a;
    os << '\n';
    for (Eigen::Index ie = 0; ie < values.rows(); ++ie) {
        os << h.elevationDeg[static_cast<std::size_t>(ie)];
        for (Eigen::Index ia = 0; ia < values.cols(); ++ia) os << ',' << values(ie, ia);
        os << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

}  // namespace risobf
