/*
 * gnssgnc — measurement models for pseudorange and Doppler observables:
 * residuals, analytic Jacobians, the elevation/SNR sigma model, snapshot
 * Doppler velocity estimation and threshold screening.
 */
#ifndef GNSSGNC_OBS_MODEL_H
#define GNSSGNC_OBS_MODEL_H

#include <string>
#include <vector>

#include <Eigen/Core>

#include "gnssgnc/geo.h"

namespace gnssgnc::obs {

enum class System { kGps, kBeiDou };
enum class Label { kLos, kNlos, kMultipath, kUnknown };

std::string to_string(System s);
std::string to_string(Label l);
System system_from_string(const std::string& s);
Label label_from_string(const std::string& s);

/* One satellite's observables at one epoch. Pseudorange arrives with
 * satellite-clock and atmospheric corrections already applied; residual
 * atmospheric error is part of the error budget, not the model. */
struct SatelliteObservation {
    double t = 0.0;                 // epoch time, s
    int sat_id = 0;
    System system = System::kGps;
    geo::EcefPoint sat_pos = geo::EcefPoint::Zero();      // m
    geo::EcefVelocity sat_vel = geo::EcefVelocity::Zero();  // m/s
    double pseudorange = 0.0;       // m
    double doppler = 0.0;           // Hz; lambda * doppler equals the expected range rate
    double wavelength = 0.0;        // m
    double cn0 = 0.0;               // dB-Hz
    Label label = Label::kUnknown;  // ground truth, evaluation only
};

/* Receiver state at one epoch. Clock bias and drift are kept in meters
 * and m/s respectively; the speed-of-light factor is already folded in. */
struct EpochState {
    double t = 0.0;
    geo::EcefPoint pos = geo::EcefPoint::Zero();
    geo::EcefVelocity vel = geo::EcefVelocity::Zero();
    double clk_bias = 0.0;   // m
    double clk_drift = 0.0;  // m/s
};

/* sigma^2 = sigma0^2 * (1 / sin^2(el)) * 10^((S1 - min(cn0, S1)) / A).
 * Elevation inflation plus exponential SNR inflation; saturates at sigma0
 * for a zenith satellite at or above the S1 carrier-to-noise threshold. */
struct SigmaModelConfig {
    double sigma0 = 1.0;       // m
    double snr_threshold = 45.0;  // S1, dB-Hz
    double snr_scale = 30.0;      // A, dB-Hz
};

double measurement_sigma(double elevation, double cn0, const SigmaModelConfig& cfg);

/* Predicted pseudorange: geometric range plus receiver clock bias (m). */
double pseudorange_predict(const EpochState& state, const geo::EcefPoint& sat_pos);

/* Sigma-whitened pseudorange residual, (measured - predicted) / sigma,
 * with its Jacobian over [pos(3), clk_bias]. */
struct PseudorangeResidual {
    double value = 0.0;            // whitened
    Eigen::Vector3d d_pos = Eigen::Vector3d::Zero();
    double d_clk_bias = 0.0;
};
PseudorangeResidual pseudorange_residual(const SatelliteObservation& obs,
                                         const EpochState& state, double sigma);

/* Expected range rate with the earth-rotation (Sagnac) term. */
double range_rate_expected(const EpochState& state, const geo::EcefPoint& sat_pos,
                           const geo::EcefVelocity& sat_vel);

/* Partials of the expected range rate over receiver position and velocity. */
struct RangeRateJacobian {
    Eigen::Vector3d d_pos = Eigen::Vector3d::Zero();
    Eigen::Vector3d d_vel = Eigen::Vector3d::Zero();
};
RangeRateJacobian range_rate_jacobian(const EpochState& state,
                                      const geo::EcefPoint& sat_pos,
                                      const geo::EcefVelocity& sat_vel);

/* Snapshot receiver velocity and clock drift from the Doppler set of one
 * epoch, solved by iterated least squares at a fixed position estimate.
 * Requires >= 4 observations and full-rank geometry (DivergenceError). */
struct DopplerVelocitySolution {
    geo::EcefVelocity vel = geo::EcefVelocity::Zero();
    double clk_drift = 0.0;  // m/s
};
DopplerVelocitySolution doppler_wls_velocity(const std::vector<SatelliteObservation>& obs,
                                             const geo::EcefPoint& pos_estimate);

/* Doppler velocity factor: residual v_meas - (pos_next - pos) / dt, whitened
 * per axis by sigma. Jacobian blocks over both positions are +/- I/(dt*sigma). */
struct DopplerVelocityResidual {
    Eigen::Vector3d value = Eigen::Vector3d::Zero();  // whitened
    double d_pos_t;       // diagonal entry of d(value)/d(pos_t), = +1/(dt*sigma)
    double d_pos_t1;      // diagonal entry of d(value)/d(pos_t1), = -1/(dt*sigma)
};
DopplerVelocityResidual doppler_velocity_residual(const Eigen::Vector3d& v_meas,
                                                  const EpochState& state_t,
                                                  const EpochState& state_t1,
                                                  double sigma);

/* Keeps observations with elevation(sat, rcv) > min_elevation and
 * cn0 > min_cn0; preserves order. `removed` reports the dropped count. */
std::vector<SatelliteObservation> filter_observations(
    const std::vector<SatelliteObservation>& obs, const geo::EcefPoint& rcv_pos,
    double min_elevation, double min_cn0, int* removed = nullptr);

}  // namespace gnssgnc::obs

#endif
