#include "gnssgnc/obs_model.h"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "gnssgnc/errors.h"

namespace gnssgnc::obs {

std::string to_string(System s) {
    return s == System::kGps ? "GPS" : "BeiDou";
}

std::string to_string(Label l) {
    switch (l) {
        case Label::kLos: return "LOS";
        case Label::kNlos: return "NLOS";
        case Label::kMultipath: return "MP";
        default: return "UNK";
    }
}

System system_from_string(const std::string& s) {
    if (s == "GPS") return System::kGps;
    if (s == "BeiDou") return System::kBeiDou;
    throw InputError("unknown constellation tag: " + s);
}

Label label_from_string(const std::string& s) {
    if (s == "LOS") return Label::kLos;
    if (s == "NLOS") return Label::kNlos;
    if (s == "MP") return Label::kMultipath;
    if (s == "UNK") return Label::kUnknown;
    throw InputError("unknown signal label: " + s);
}

double measurement_sigma(double elevation, double cn0, const SigmaModelConfig& cfg) {
    if (elevation <= 0.0 || elevation > M_PI / 2.0 + 1e-12) {
        throw std::invalid_argument("measurement_sigma: elevation must lie in (0, pi/2]");
    }
    const double s = std::sin(elevation);
    const double snr_term =
        std::pow(10.0, (cfg.snr_threshold - std::min(cn0, cfg.snr_threshold)) / cfg.snr_scale);
    const double var = cfg.sigma0 * cfg.sigma0 / (s * s) * snr_term;
    return std::sqrt(var);
}

double pseudorange_predict(const EpochState& state, const geo::EcefPoint& sat_pos) {
    const double range = (sat_pos - state.pos).norm();
    if (range == 0.0) {
        throw std::invalid_argument("pseudorange_predict: coincident positions");
    }
    return range + state.clk_bias;
}

PseudorangeResidual pseudorange_residual(const SatelliteObservation& obs,
                                         const EpochState& state, double sigma) {
    if (sigma <= 0.0) {
        throw std::invalid_argument("pseudorange_residual: sigma must be positive");
    }
    PseudorangeResidual r;
    r.value = (obs.pseudorange - pseudorange_predict(state, obs.sat_pos)) / sigma;
    // d(predicted)/d(pos) = -los, so the residual gains +los/sigma
    r.d_pos = geo::los_unit_vector(obs.sat_pos, state.pos) / sigma;
    r.d_clk_bias = -1.0 / sigma;
    return r;
}

double range_rate_expected(const EpochState& state, const geo::EcefPoint& sat_pos,
                           const geo::EcefVelocity& sat_vel) {
    const Eigen::Vector3d los = geo::los_unit_vector(sat_pos, state.pos);
    const double sagnac = geo::Constants::kEarthRotationRate / geo::Constants::kSpeedOfLight *
                          (sat_vel.y() * state.pos.x() + sat_pos.y() * state.vel.x() -
                           sat_pos.x() * state.vel.y() - sat_vel.x() * state.pos.y());
    return los.dot(sat_vel - state.vel) + sagnac;
}

RangeRateJacobian range_rate_jacobian(const EpochState& state,
                                      const geo::EcefPoint& sat_pos,
                                      const geo::EcefVelocity& sat_vel) {
    const Eigen::Vector3d d = sat_pos - state.pos;
    const double rho = d.norm();
    if (rho == 0.0) {
        throw std::invalid_argument("range_rate_jacobian: coincident positions");
    }
    const Eigen::Vector3d los = d / rho;
    const double k = geo::Constants::kEarthRotationRate / geo::Constants::kSpeedOfLight;

    RangeRateJacobian j;
    // d(los)/d(pos) = (los*los^T - I)/rho applied to the relative velocity
    const Eigen::Vector3d rel_vel = sat_vel - state.vel;
    j.d_pos = (los * los.dot(rel_vel) - rel_vel) / rho;
    j.d_pos.x() += k * sat_vel.y();
    j.d_pos.y() -= k * sat_vel.x();
    j.d_vel = -los;
    j.d_vel.x() += k * sat_pos.y();
    j.d_vel.y() -= k * sat_pos.x();
    return j;
}

DopplerVelocitySolution doppler_wls_velocity(const std::vector<SatelliteObservation>& obs,
                                             const geo::EcefPoint& pos_estimate) {
    std::vector<const SatelliteObservation*> usable;
    for (const auto& o : obs) {
        if (std::isfinite(o.doppler) && o.wavelength > 0.0) usable.push_back(&o);
    }
    const int m = static_cast<int>(usable.size());
    if (m < 4) {
        throw DivergenceError("doppler_wls_velocity: fewer than 4 usable observations");
    }

    EpochState state;
    state.pos = pos_estimate;

    Eigen::Vector4d x = Eigen::Vector4d::Zero();  // [vel(3), clk_drift]
    for (int iter = 0; iter < 10; ++iter) {
        state.vel = x.head<3>();
        Eigen::MatrixXd jac(m, 4);
        Eigen::VectorXd res(m);
        for (int i = 0; i < m; ++i) {
            const auto& o = *usable[i];
            const double predicted =
                range_rate_expected(state, o.sat_pos, o.sat_vel) + x(3);
            res(i) = o.wavelength * o.doppler - predicted;
            const RangeRateJacobian rj = range_rate_jacobian(state, o.sat_pos, o.sat_vel);
            jac.row(i).head<3>() = rj.d_vel;
            jac(i, 3) = 1.0;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
        qr.setThreshold(1e-10);
        if (qr.rank() < 4) {
            throw DivergenceError("doppler_wls_velocity: rank-deficient geometry");
        }
        const Eigen::Vector4d dx = qr.solve(res);
        x += dx;
        if (dx.head<3>().norm() < 1e-6) break;
    }

    DopplerVelocitySolution out;
    out.vel = x.head<3>();
    out.clk_drift = x(3);
    return out;
}

DopplerVelocityResidual doppler_velocity_residual(const Eigen::Vector3d& v_meas,
                                                  const EpochState& state_t,
                                                  const EpochState& state_t1,
                                                  double sigma) {
    if (state_t1.t <= state_t.t) {
        throw std::invalid_argument("doppler_velocity_residual: non-increasing timestamps");
    }
    if (sigma <= 0.0) {
        throw std::invalid_argument("doppler_velocity_residual: sigma must be positive");
    }
    const double dt = state_t1.t - state_t.t;
    DopplerVelocityResidual r;
    r.value = (v_meas - (state_t1.pos - state_t.pos) / dt) / sigma;
    r.d_pos_t = 1.0 / (dt * sigma);
    r.d_pos_t1 = -1.0 / (dt * sigma);
    return r;
}

std::vector<SatelliteObservation> filter_observations(
    const std::vector<SatelliteObservation>& obs, const geo::EcefPoint& rcv_pos,
    double min_elevation, double min_cn0, int* removed) {
    std::vector<SatelliteObservation> kept;
    kept.reserve(obs.size());
    for (const auto& o : obs) {
        const double el = geo::elevation_azimuth(o.sat_pos, rcv_pos).elevation;
        if (el > min_elevation && o.cn0 > min_cn0) kept.push_back(o);
    }
    if (removed != nullptr) *removed = static_cast<int>(obs.size() - kept.size());
    return kept;
}

}  // namespace gnssgnc::obs
