/*
 * gnssgnc — synthetic scenario generation: shell-constellation geometry,
 * receiver trajectory and clock processes, forward measurement synthesis
 * and labeled NLOS/multipath injection. Everything is deterministic under
 * the scenario seeds; per-observation error budgets are kept so tests can
 * reconstruct each pseudorange term by term.
 */
#ifndef GNSSGNC_SIM_H
#define GNSSGNC_SIM_H

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "gnssgnc/geo.h"
#include "gnssgnc/obs_model.h"

namespace gnssgnc::sim {

enum class TrajectoryType { kStatic, kStraightLine, kWaypoints };

struct TrajectorySpec {
    TrajectoryType type = TrajectoryType::kStatic;
    Eigen::Vector3d enu_velocity = Eigen::Vector3d::Zero();  // m/s, straight line
    std::vector<Eigen::Vector3d> waypoints;  // ENU m, implicit start at origin
    double speed = 0.0;                      // m/s along the polyline
};

struct ClockSpec {
    double bias0 = 0.0;     // m
    double drift = 0.0;     // m/s, constant
    double walk_psd = 0.0;  // m^2/s random walk on the bias
};

struct OutlierSpec {
    double fraction = 0.0;   // of satellite-epoch cells, in [0,1)
    double bias_min = 20.0;  // m, positive path extension
    double bias_max = 100.0;
    int persistence = 5;  // consecutive epochs per blocked-satellite run
};

struct Scenario {
    double duration = 100.0;  // s
    double rate = 1.0;        // Hz
    int sat_count = 10;
    std::uint64_t geometry_seed = 1;
    geo::GeodeticPoint origin{0.6528, -2.1319, 30.0};  // rad, rad, m
    TrajectorySpec trajectory;
    ClockSpec clock;
    double pr_noise_sigma = 0.0;       // m
    double doppler_noise_sigma = 0.0;  // Hz
    double atmosphere_max = 0.0;       // m, bound on the per-satellite ramp
    double cn0_min = 38.0;             // dB-Hz
    double cn0_max = 50.0;
    OutlierSpec outliers;
    std::uint64_t seed = 1;
};

struct SatelliteState {
    int sat_id = 0;
    obs::System system = obs::System::kGps;
    double wavelength = 0.0;  // m
    geo::EcefPoint pos = geo::EcefPoint::Zero();
    geo::EcefVelocity vel = geo::EcefVelocity::Zero();
};

struct SimTruth {
    std::vector<obs::EpochState> states;                  // one per epoch
    std::vector<std::vector<SatelliteState>> satellites;  // [epoch][sat]
};

/* Per-observation decomposition. The synthesized pseudorange equals
 * ((((range + clk_bias) + atmosphere) + noise) + outlier_bias) with that
 * exact association order, so the identity is bit-reproducible. */
struct ErrorBudgetRecord {
    double t = 0.0;
    int sat_id = 0;
    double range = 0.0;         // m, geometric
    double clk_bias = 0.0;      // m
    double atmosphere = 0.0;    // m
    double noise = 0.0;         // m
    double outlier_bias = 0.0;  // m, 0 for clean cells
    obs::Label label = obs::Label::kLos;
    double pseudorange = 0.0;  // as emitted
};

/* Truth trajectory plus per-epoch satellite states. Satellites ride
 * circular tracks on a 26.56e6 m shell, seeded to stratify elevation and
 * azimuth at the origin; all sat_count satellites appear at every epoch.
 * Throws InputError on invalid spec or when any epoch sees fewer than 4
 * satellites above 10 degrees elevation. */
SimTruth generate_scenario(const Scenario& spec);

struct SynthesisResult {
    std::vector<std::vector<obs::SatelliteObservation>> epochs;
    std::vector<ErrorBudgetRecord> budget;  // row-aligned with flattened epochs
};

/* Forward models every observable off the truth, then applies the outlier
 * spec. Doppler carries range rate plus clock drift (in lambda units) plus
 * noise; outliers touch neither Doppler nor C/N0. */
SynthesisResult synthesize_observations(const SimTruth& truth, const Scenario& spec);

struct OutlierCell {
    int epoch = 0;
    int sat_id = 0;
    double bias = 0.0;  // m
    obs::Label label = obs::Label::kNlos;
};

/* Flags exactly floor(fraction * sat_count * epochs) cells as persistent
 * per-satellite runs (run length = persistence, except one possibly
 * truncated run to hit the count), adds one positive bias per run, labels
 * NLOS for bias >= 10 m and MP below. Logs a warning when some epoch
 * retains fewer than 4 clean satellites. */
std::vector<OutlierCell> inject_outliers(
    std::vector<std::vector<obs::SatelliteObservation>>& epochs,
    const OutlierSpec& spec, std::uint64_t seed);

}  // namespace gnssgnc::sim

#endif
