#include "gnssgnc/sim.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>

#include <Eigen/Geometry>

#include "gnssgnc/errors.h"
#include "gnssgnc/log.h"

namespace gnssgnc::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kShellRadius = 26.56e6;  // m from earth center
constexpr double kOrbitSpeed = 3.9e3;     // m/s tangential
const double kGpsL1Wavelength = geo::Constants::kSpeedOfLight / 1575.42e6;
const double kBeiDouB1Wavelength = geo::Constants::kSpeedOfLight / 1561.098e6;
constexpr double kVisibilityMask = 10.0 * kPi / 180.0;
constexpr double kNlosLabelThreshold = 10.0;  // m, below is multipath

/* Child seeds derived in a fixed order from the master seed so that
 * generation and synthesis agree without sharing engine state. */
struct ChildSeeds {
    std::uint64_t clock, atmosphere, noise, cn0, outlier;
};

ChildSeeds derive_seeds(std::uint64_t master) {
    std::mt19937_64 eng(master);
    ChildSeeds s{};
    s.clock = eng();
    s.atmosphere = eng();
    s.noise = eng();
    s.cn0 = eng();
    s.outlier = eng();
    return s;
}

void validate(const Scenario& spec) {
    if (spec.duration <= 0.0 || spec.rate <= 0.0) {
        throw InputError("scenario: duration and rate must be positive");
    }
    if (spec.sat_count < 4) {
        throw InputError("scenario: need at least 4 satellites");
    }
    if (spec.outliers.fraction < 0.0 || spec.outliers.fraction >= 1.0) {
        throw InputError("scenario: outlier fraction must lie in [0,1)");
    }
    if (spec.outliers.bias_min <= 0.0 || spec.outliers.bias_max < spec.outliers.bias_min) {
        throw InputError("scenario: outlier bias range must be positive and ordered");
    }
    if (spec.outliers.persistence < 1) {
        throw InputError("scenario: outlier persistence must be at least 1");
    }
    if (spec.pr_noise_sigma < 0.0 || spec.doppler_noise_sigma < 0.0 ||
        spec.atmosphere_max < 0.0) {
        throw InputError("scenario: noise parameters must be non-negative");
    }
    if (spec.cn0_max < spec.cn0_min) {
        throw InputError("scenario: cn0 range must be ordered");
    }
    if (spec.trajectory.type == TrajectoryType::kWaypoints &&
        (spec.trajectory.waypoints.empty() || spec.trajectory.speed <= 0.0)) {
        throw InputError("scenario: waypoint trajectory needs waypoints and a speed");
    }
}

int epoch_count(const Scenario& spec) {
    return static_cast<int>(std::llround(spec.duration * spec.rate));
}

/* ENU position/velocity along the trajectory at time t. */
void trajectory_enu(const TrajectorySpec& traj, double t, Eigen::Vector3d* pos,
                    Eigen::Vector3d* vel) {
    switch (traj.type) {
        case TrajectoryType::kStatic:
            *pos = Eigen::Vector3d::Zero();
            *vel = Eigen::Vector3d::Zero();
            return;
        case TrajectoryType::kStraightLine:
            *pos = traj.enu_velocity * t;
            *vel = traj.enu_velocity;
            return;
        case TrajectoryType::kWaypoints: {
            double s = traj.speed * t;  // arc length traveled
            Eigen::Vector3d prev = Eigen::Vector3d::Zero();
            for (const auto& wp : traj.waypoints) {
                const double seg = (wp - prev).norm();
                if (s <= seg && seg > 0.0) {
                    const Eigen::Vector3d dir = (wp - prev) / seg;
                    *pos = prev + dir * s;
                    *vel = dir * traj.speed;
                    return;
                }
                s -= seg;
                prev = wp;
            }
            *pos = prev;  // past the end: hold
            *vel = Eigen::Vector3d::Zero();
            return;
        }
    }
    throw std::logic_error("trajectory_enu: unhandled trajectory type");
}

}  // namespace

SimTruth generate_scenario(const Scenario& spec) {
    validate(spec);
    const int n_epochs = epoch_count(spec);
    if (n_epochs < 1) {
        throw InputError("scenario: duration*rate yields no epochs");
    }
    const double dt = 1.0 / spec.rate;
    const geo::EcefPoint origin_ecef = geo::geodetic_to_ecef(spec.origin);
    const Eigen::Matrix3d basis = geo::enu_basis(origin_ecef);
    const ChildSeeds seeds = derive_seeds(spec.seed);

    SimTruth out;
    out.states.reserve(n_epochs);

    std::mt19937_64 clock_eng(seeds.clock);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    double clk_bias = spec.clock.bias0;
    for (int k = 0; k < n_epochs; ++k) {
        const double t = k * dt;
        obs::EpochState s;
        s.t = t;
        Eigen::Vector3d pos_enu, vel_enu;
        trajectory_enu(spec.trajectory, t, &pos_enu, &vel_enu);
        s.pos = origin_ecef + basis * pos_enu;
        s.vel = basis * vel_enu;
        s.clk_bias = clk_bias;
        s.clk_drift = spec.clock.drift;
        out.states.push_back(s);
        clk_bias += spec.clock.drift * dt;
        if (spec.clock.walk_psd > 0.0) {
            clk_bias += std::sqrt(spec.clock.walk_psd * dt) * unit_normal(clock_eng);
        }
    }

    /* Satellite tracks: stratified elevation [15, 85] deg and shuffled
     * stratified azimuth at the origin; circular motion on the shell in a
     * seeded orbital plane. */
    std::mt19937_64 geom(spec.geometry_seed);
    std::uniform_real_distribution<double> jitter(0.05, 0.95);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    const int n = spec.sat_count;
    std::vector<int> az_stratum(n);
    for (int k = 0; k < n; ++k) az_stratum[k] = k;
    std::shuffle(az_stratum.begin(), az_stratum.end(), geom);

    struct Track {
        Eigen::Vector3d u0, tangent;
        int sat_id;
        obs::System system;
        double wavelength;
    };
    std::vector<Track> tracks;
    tracks.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double el = (15.0 + (k + jitter(geom)) * 70.0 / n) * kPi / 180.0;
        const double az = (az_stratum[k] + jitter(geom)) * 2.0 * kPi / n;
        const Eigen::Vector3d los_enu(std::sin(az) * std::cos(el),
                                      std::cos(az) * std::cos(el), std::sin(el));
        const Eigen::Vector3d los = basis * los_enu;
        const double b = origin_ecef.dot(los);
        const double d =
            -b + std::sqrt(b * b + kShellRadius * kShellRadius - origin_ecef.squaredNorm());
        Track tr;
        tr.u0 = (origin_ecef + d * los).normalized();
        Eigen::Vector3d w = tr.u0.cross(Eigen::Vector3d::UnitZ());
        if (w.norm() < 1e-6) w = tr.u0.cross(Eigen::Vector3d::UnitX());
        w.normalize();
        const double psi = angle(geom);
        tr.tangent = w * std::cos(psi) + tr.u0.cross(w) * std::sin(psi);
        tr.sat_id = k + 1;
        tr.system = (k % 2 == 0) ? obs::System::kGps : obs::System::kBeiDou;
        tr.wavelength = (tr.system == obs::System::kGps) ? kGpsL1Wavelength
                                                         : kBeiDouB1Wavelength;
        tracks.push_back(tr);
    }

    const double omega_orb = kOrbitSpeed / kShellRadius;
    out.satellites.resize(n_epochs);
    for (int k = 0; k < n_epochs; ++k) {
        const double t = k * dt;
        const double c = std::cos(omega_orb * t), s = std::sin(omega_orb * t);
        auto& epoch_sats = out.satellites[k];
        epoch_sats.reserve(n);
        int visible = 0;
        for (const auto& tr : tracks) {
            SatelliteState st;
            st.sat_id = tr.sat_id;
            st.system = tr.system;
            st.wavelength = tr.wavelength;
            st.pos = kShellRadius * (tr.u0 * c + tr.tangent * s);
            st.vel = kOrbitSpeed * (-tr.u0 * s + tr.tangent * c);
            if (geo::elevation_azimuth(st.pos, out.states[k].pos).elevation >=
                kVisibilityMask) {
                ++visible;
            }
            epoch_sats.push_back(st);
        }
        if (visible < 4) {
            throw InputError("scenario: fewer than 4 satellites above mask at epoch " +
                             std::to_string(k));
        }
    }
    return out;
}

SynthesisResult synthesize_observations(const SimTruth& truth, const Scenario& spec) {
    validate(spec);
    const int n_epochs = static_cast<int>(truth.states.size());
    const ChildSeeds seeds = derive_seeds(spec.seed);

    std::mt19937_64 atm_eng(seeds.atmosphere);
    std::uniform_real_distribution<double> atm_draw(-spec.atmosphere_max,
                                                    spec.atmosphere_max);
    /* Per-satellite linear ramp between two bounded endpoints. */
    std::map<int, std::pair<double, double>> atm_ramp;
    if (spec.atmosphere_max > 0.0 && n_epochs > 0) {
        for (const auto& st : truth.satellites.front()) {
            const double a = atm_draw(atm_eng);
            const double b = atm_draw(atm_eng);
            atm_ramp[st.sat_id] = {a, b};
        }
    }

    std::mt19937_64 noise_eng(seeds.noise);
    std::mt19937_64 cn0_eng(seeds.cn0);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::uniform_real_distribution<double> cn0_draw(spec.cn0_min, spec.cn0_max);

    SynthesisResult out;
    out.epochs.resize(n_epochs);
    out.budget.reserve(static_cast<std::size_t>(n_epochs) * spec.sat_count);

    for (int k = 0; k < n_epochs; ++k) {
        const obs::EpochState& rs = truth.states[k];
        auto& epoch = out.epochs[k];
        epoch.reserve(truth.satellites[k].size());
        for (const auto& st : truth.satellites[k]) {
            const double range = (st.pos - rs.pos).norm();
            double atmosphere = 0.0;
            if (const auto it = atm_ramp.find(st.sat_id); it != atm_ramp.end()) {
                const double frac = (spec.duration > 0.0) ? rs.t / spec.duration : 0.0;
                atmosphere = it->second.first +
                             (it->second.second - it->second.first) * frac;
            }
            const double noise = (spec.pr_noise_sigma > 0.0)
                                     ? spec.pr_noise_sigma * unit_normal(noise_eng)
                                     : 0.0;
            const double dopp_noise = (spec.doppler_noise_sigma > 0.0)
                                          ? spec.doppler_noise_sigma * unit_normal(noise_eng)
                                          : 0.0;

            obs::SatelliteObservation o;
            o.t = rs.t;
            o.sat_id = st.sat_id;
            o.system = st.system;
            o.sat_pos = st.pos;
            o.sat_vel = st.vel;
            o.wavelength = st.wavelength;
            o.pseudorange = (((range + rs.clk_bias) + atmosphere) + noise);
            o.doppler =
                (obs::range_rate_expected(rs, st.pos, st.vel) + rs.clk_drift) /
                    st.wavelength +
                dopp_noise;
            o.cn0 = cn0_draw(cn0_eng);
            o.label = obs::Label::kLos;
            epoch.push_back(o);

            ErrorBudgetRecord rec;
            rec.t = rs.t;
            rec.sat_id = st.sat_id;
            rec.range = range;
            rec.clk_bias = rs.clk_bias;
            rec.atmosphere = atmosphere;
            rec.noise = noise;
            rec.pseudorange = o.pseudorange;
            out.budget.push_back(rec);
        }
    }

    const std::vector<OutlierCell> cells =
        inject_outliers(out.epochs, spec.outliers, seeds.outlier);

    /* Index budget rows by (epoch, sat) to fold the injection back in. */
    std::map<std::pair<int, int>, std::size_t> row_of;
    {
        std::size_t row = 0;
        for (int k = 0; k < n_epochs; ++k) {
            for (const auto& st : truth.satellites[k]) {
                row_of[{k, st.sat_id}] = row++;
            }
        }
    }
    for (const auto& cell : cells) {
        ErrorBudgetRecord& rec = out.budget[row_of.at({cell.epoch, cell.sat_id})];
        rec.outlier_bias = cell.bias;
        rec.label = cell.label;
        rec.pseudorange += cell.bias;
    }
    return out;
}

std::vector<OutlierCell> inject_outliers(
    std::vector<std::vector<obs::SatelliteObservation>>& epochs,
    const OutlierSpec& spec, std::uint64_t seed) {
    if (spec.fraction < 0.0 || spec.fraction >= 1.0) {
        throw InputError("inject_outliers: fraction must lie in [0,1)");
    }
    std::size_t cell_count = 0;
    for (const auto& e : epochs) cell_count += e.size();
    const std::size_t total =
        static_cast<std::size_t>(spec.fraction * static_cast<double>(cell_count));
    std::vector<OutlierCell> out;
    if (total == 0) return out;

    /* Per-satellite list of (epoch, index-within-epoch), epoch-ordered. */
    std::map<int, std::vector<std::pair<int, int>>> by_sat;
    for (int k = 0; k < static_cast<int>(epochs.size()); ++k) {
        for (int i = 0; i < static_cast<int>(epochs[k].size()); ++i) {
            by_sat[epochs[k][i].sat_id].emplace_back(k, i);
        }
    }
    std::vector<int> sat_ids;
    for (const auto& [id, rows] : by_sat) {
        if (static_cast<int>(rows.size()) >= spec.persistence) sat_ids.push_back(id);
    }
    if (sat_ids.empty()) {
        throw InputError("inject_outliers: no satellite track fits the persistence");
    }

    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> bias_draw(spec.bias_min, spec.bias_max);
    std::map<int, std::set<int>> marked;  // sat_id -> marked positions in its track

    std::size_t placed = 0;
    long attempts = 0;
    const long max_strict_attempts = 100000;
    while (placed < total) {
        if (attempts > 10 * max_strict_attempts) {
            /* dense fractions: sweep tracks in order instead of sampling */
            for (const int sat : sat_ids) {
                auto& used = marked[sat];
                const auto& rows = by_sat[sat];
                for (int p = 0; p < static_cast<int>(rows.size()) && placed < total;
                     ++p) {
                    if (used.count(p)) continue;
                    used.insert(p);
                    const double bias = bias_draw(eng);
                    const obs::Label label = (bias >= kNlosLabelThreshold)
                                                 ? obs::Label::kNlos
                                                 : obs::Label::kMultipath;
                    const auto [epoch_idx, obs_idx] = rows[p];
                    obs::SatelliteObservation& o = epochs[epoch_idx][obs_idx];
                    o.pseudorange += bias;
                    o.label = label;
                    out.push_back({epoch_idx, o.sat_id, bias, label});
                    ++placed;
                }
            }
            break;
        }
        const int sat = sat_ids[std::uniform_int_distribution<int>(
            0, static_cast<int>(sat_ids.size()) - 1)(eng)];
        const auto& rows = by_sat[sat];
        const int run_len = static_cast<int>(
            std::min<std::size_t>(spec.persistence, total - placed));
        const int max_start = static_cast<int>(rows.size()) - run_len;
        const int start = std::uniform_int_distribution<int>(0, max_start)(eng);

        auto& used = marked[sat];
        bool clash = false;
        const bool strict = attempts++ < max_strict_attempts;
        const int lo = strict ? start - 1 : start;
        const int hi = strict ? start + run_len : start + run_len - 1;
        for (int p = lo; p <= hi && !clash; ++p) {
            if (used.count(p)) clash = true;
        }
        if (clash) continue;

        const double bias = bias_draw(eng);
        const obs::Label label =
            (bias >= kNlosLabelThreshold) ? obs::Label::kNlos : obs::Label::kMultipath;
        for (int p = start; p < start + run_len; ++p) {
            used.insert(p);
            const auto [epoch_idx, obs_idx] = rows[p];
            obs::SatelliteObservation& o = epochs[epoch_idx][obs_idx];
            o.pseudorange += bias;
            o.label = label;
            out.push_back({epoch_idx, o.sat_id, bias, label});
        }
        placed += run_len;
    }

    for (int k = 0; k < static_cast<int>(epochs.size()); ++k) {
        int clean = 0;
        for (const auto& o : epochs[k]) {
            if (o.label == obs::Label::kLos) ++clean;
        }
        if (clean < 4) {
            log::warn("inject_outliers: epoch " + std::to_string(k) +
                      " retains only " + std::to_string(clean) + " clean satellites");
        }
    }
    std::sort(out.begin(), out.end(), [](const OutlierCell& a, const OutlierCell& b) {
        return a.epoch != b.epoch ? a.epoch < b.epoch : a.sat_id < b.sat_id;
    });
    return out;
}

}  // namespace gnssgnc::sim
