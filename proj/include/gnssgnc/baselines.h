/*
 * gnssgnc — reference estimators: snapshot weighted least squares and an
 * EKF pseudorange/Doppler filter, used both as comparison methods and as
 * the initialization for the batch optimizer.
 */
#ifndef GNSSGNC_BASELINES_H
#define GNSSGNC_BASELINES_H

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gnssgnc/obs_model.h"

namespace gnssgnc::baselines {

/* Snapshot WLS fix from one epoch of pseudoranges. */
struct WlsFix {
    geo::EcefPoint pos = geo::EcefPoint::Zero();
    double clk_bias = 0.0;                        // m
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  // over [pos, clk_bias]
};

/* Iterated linearized WLS on the pseudorange model with 1/sigma^2 weights.
 * A first unweighted pass fixes the linearization point, sigmas are then
 * evaluated from its elevations, and the weighted pass iterates until the
 * position update drops below 1e-4 m (at most 10 iterations per pass).
 * Throws DivergenceError on <4 satellites, singular geometry or
 * non-convergence. Default start point is the earth-surface fallback
 * (0, 0, a) unless `start` is supplied. */
WlsFix wls_position(const std::vector<obs::SatelliteObservation>& observations,
                    const obs::SigmaModelConfig& sigma_cfg,
                    const std::optional<geo::EcefPoint>& start = std::nullopt);

struct EkfConfig {
    double vel_psd = 1.0;        // position-velocity random walk, m^2/s^3
    double clk_bias_psd = 0.1;   // clock bias random walk, m^2/s
    double clk_drift_psd = 0.1;  // clock drift random walk, m^2/s^3
    double doppler_sigma = 0.2;  // range-rate measurement noise, m/s
    // initial covariance diagonal over [pos, vel, clk_bias, clk_drift]
    double init_pos_var = 100.0;
    double init_vel_var = 25.0;
    double init_clk_var = 100.0;
    double init_drift_var = 25.0;
    // innovation gate in sigma multiples; infinity disables gating
    double innovation_gate = std::numeric_limits<double>::infinity();
};

/* 8-state (pos, vel, clock bias, clock drift) constant-velocity EKF with
 * sequential scalar Joseph-form updates, initialized from the first epoch's
 * WLS fix. Throws DivergenceError on initialization failure or a non-finite
 * state (message carries the epoch index). */
std::vector<obs::EpochState> ekf_run(
    const std::vector<std::vector<obs::SatelliteObservation>>& epochs,
    const EkfConfig& cfg, const obs::SigmaModelConfig& sigma_cfg);

/* Per-epoch covariance trail of the last ekf_run-style pass; exposed for
 * filter health checks. */
struct EkfDiagnostics {
    std::vector<Eigen::Matrix<double, 8, 8>> covariances;
};
std::vector<obs::EpochState> ekf_run(
    const std::vector<std::vector<obs::SatelliteObservation>>& epochs,
    const EkfConfig& cfg, const obs::SigmaModelConfig& sigma_cfg,
    EkfDiagnostics* diagnostics);

}  // namespace gnssgnc::baselines

#endif
