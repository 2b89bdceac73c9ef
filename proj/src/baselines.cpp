#include "gnssgnc/baselines.h"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "gnssgnc/errors.h"
#include "gnssgnc/log.h"

namespace gnssgnc::baselines {

namespace {

/* One Gauss-Newton pass of the linearized pseudorange solve at fixed
 * per-observation sigmas. Returns false when the position update never
 * drops below the tolerance. */
bool iterate_pseudorange_ls(const std::vector<obs::SatelliteObservation>& observations,
                            const std::vector<double>& sigmas, WlsFix* fix) {
    const int m = static_cast<int>(observations.size());
    for (int iter = 0; iter < 10; ++iter) {
        Eigen::MatrixXd jac(m, 4);
        Eigen::VectorXd res(m);
        Eigen::VectorXd w(m);
        obs::EpochState state;
        state.pos = fix->pos;
        state.clk_bias = fix->clk_bias;
        for (int i = 0; i < m; ++i) {
            const auto& o = observations[i];
            res(i) = o.pseudorange - obs::pseudorange_predict(state, o.sat_pos);
            const Eigen::Vector3d los = geo::los_unit_vector(o.sat_pos, state.pos);
            // d(predicted)/d[pos, clk] = [-los, 1]
            jac.row(i) << -los.transpose(), 1.0;
            w(i) = 1.0 / (sigmas[i] * sigmas[i]);
        }
        const Eigen::Matrix4d ata = jac.transpose() * w.asDiagonal() * jac;
        const Eigen::Vector4d atb = jac.transpose() * (w.asDiagonal() * res);
        Eigen::FullPivLU<Eigen::Matrix4d> lu(ata);
        if (!lu.isInvertible()) {
            throw DivergenceError("wls_position: singular geometry");
        }
        const Eigen::Vector4d dx = lu.solve(atb);
        fix->pos += dx.head<3>();
        fix->clk_bias += dx(3);
        if (!fix->pos.allFinite() || !std::isfinite(fix->clk_bias)) {
            throw DivergenceError("wls_position: diverged to non-finite state");
        }
        if (dx.head<3>().norm() < 1e-4) {
            fix->covariance = lu.inverse();
            return true;
        }
    }
    return false;
}

}  // namespace

WlsFix wls_position(const std::vector<obs::SatelliteObservation>& observations,
                    const obs::SigmaModelConfig& sigma_cfg,
                    const std::optional<geo::EcefPoint>& start) {
    if (observations.size() < 4) {
        throw DivergenceError("wls_position: fewer than 4 observations");
    }
    WlsFix fix;
    fix.pos = start.value_or(geo::EcefPoint(0.0, 0.0, geo::Constants::kWgs84A));

    // phase 1: unit weights settle the linearization point
    std::vector<double> sigmas(observations.size(), 1.0);
    if (!iterate_pseudorange_ls(observations, sigmas, &fix)) {
        throw DivergenceError("wls_position: no convergence in 10 iterations");
    }

    // phase 2: elevation/SNR sigmas from the settled estimate
    std::vector<obs::SatelliteObservation> usable;
    sigmas.clear();
    for (const auto& o : observations) {
        const double el = geo::elevation_azimuth(o.sat_pos, fix.pos).elevation;
        if (el <= 0.0) {
            log::debug("wls_position: dropping below-horizon satellite " +
                       std::to_string(o.sat_id));
            continue;
        }
        usable.push_back(o);
        sigmas.push_back(obs::measurement_sigma(el, o.cn0, sigma_cfg));
    }
    if (usable.size() < 4) {
        throw DivergenceError("wls_position: fewer than 4 above-horizon observations");
    }
    if (!iterate_pseudorange_ls(usable, sigmas, &fix)) {
        throw DivergenceError("wls_position: no convergence in 10 iterations");
    }
    return fix;
}

std::vector<obs::EpochState> ekf_run(
    const std::vector<std::vector<obs::SatelliteObservation>>& epochs,
    const EkfConfig& cfg, const obs::SigmaModelConfig& sigma_cfg) {
    return ekf_run(epochs, cfg, sigma_cfg, nullptr);
}

namespace {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/* Joseph-form scalar update, applied per satellite. */
void scalar_update(Vec8* x, Mat8* p, const Vec8& h, double innovation, double r_var,
                   double gate) {
    const double s = (h.transpose() * (*p) * h)(0, 0) + r_var;
    if (std::isfinite(gate) && innovation * innovation > gate * gate * s) return;
    const Vec8 k = (*p) * h / s;
    *x += k * innovation;
    const Mat8 ikh = Mat8::Identity() - k * h.transpose();
    *p = ikh * (*p) * ikh.transpose() + k * r_var * k.transpose();
    *p = 0.5 * (*p + p->transpose());
}

}  // namespace

std::vector<obs::EpochState> ekf_run(
    const std::vector<std::vector<obs::SatelliteObservation>>& epochs,
    const EkfConfig& cfg, const obs::SigmaModelConfig& sigma_cfg,
    EkfDiagnostics* diagnostics) {
    if (epochs.empty()) {
        throw DivergenceError("ekf_run: no epochs");
    }

    WlsFix init;
    try {
        init = wls_position(epochs.front(), sigma_cfg);
    } catch (const DivergenceError& e) {
        throw DivergenceError(std::string("ekf_run: initialization failed: ") + e.what());
    }

    Vec8 x = Vec8::Zero();  // [pos(3), vel(3), clk_bias, clk_drift]
    x.head<3>() = init.pos;
    x(6) = init.clk_bias;
    Mat8 p = Mat8::Zero();
    p.diagonal() << cfg.init_pos_var, cfg.init_pos_var, cfg.init_pos_var,
        cfg.init_vel_var, cfg.init_vel_var, cfg.init_vel_var, cfg.init_clk_var,
        cfg.init_drift_var;

    std::vector<obs::EpochState> out;
    out.reserve(epochs.size());
    double prev_t = epochs.front().empty() ? 0.0 : epochs.front().front().t;

    for (std::size_t e = 0; e < epochs.size(); ++e) {
        const auto& epoch = epochs[e];
        if (epoch.empty()) {
            throw DivergenceError("ekf_run: empty epoch " + std::to_string(e));
        }
        const double t = epoch.front().t;
        const double dt = (e == 0) ? 0.0 : t - prev_t;
        prev_t = t;

        if (dt > 0.0) {
            Mat8 f = Mat8::Identity();
            f.block<3, 3>(0, 3) = dt * Eigen::Matrix3d::Identity();
            f(6, 7) = dt;
            x = f * x;
            p = f * p * f.transpose();

            const double dt2 = dt * dt, dt3 = dt2 * dt;
            Mat8 q = Mat8::Zero();
            q.block<3, 3>(0, 0) = cfg.vel_psd * dt3 / 3.0 * Eigen::Matrix3d::Identity();
            q.block<3, 3>(0, 3) = cfg.vel_psd * dt2 / 2.0 * Eigen::Matrix3d::Identity();
            q.block<3, 3>(3, 0) = q.block<3, 3>(0, 3);
            q.block<3, 3>(3, 3) = cfg.vel_psd * dt * Eigen::Matrix3d::Identity();
            q(6, 6) = cfg.clk_bias_psd * dt + cfg.clk_drift_psd * dt3 / 3.0;
            q(6, 7) = cfg.clk_drift_psd * dt2 / 2.0;
            q(7, 6) = q(6, 7);
            q(7, 7) = cfg.clk_drift_psd * dt;
            p += q;
        }

        obs::EpochState lin;
        for (const auto& o : epoch) {
            lin.pos = x.head<3>();
            lin.vel = x.segment<3>(3);
            lin.clk_bias = x(6);
            lin.clk_drift = x(7);

            const double el = geo::elevation_azimuth(o.sat_pos, lin.pos).elevation;
            if (el <= 0.0) continue;
            const double sigma = obs::measurement_sigma(el, o.cn0, sigma_cfg);

            // pseudorange: h = range + clk_bias
            Vec8 h_pr = Vec8::Zero();
            const Eigen::Vector3d los = geo::los_unit_vector(o.sat_pos, lin.pos);
            h_pr.head<3>() = -los;
            h_pr(6) = 1.0;
            const double innov_pr =
                o.pseudorange - obs::pseudorange_predict(lin, o.sat_pos);
            scalar_update(&x, &p, h_pr, innov_pr, sigma * sigma, cfg.innovation_gate);

            // range rate: h = expected range rate + clk_drift
            lin.pos = x.head<3>();
            lin.vel = x.segment<3>(3);
            lin.clk_drift = x(7);
            if (o.wavelength > 0.0 && std::isfinite(o.doppler)) {
                const obs::RangeRateJacobian rj =
                    obs::range_rate_jacobian(lin, o.sat_pos, o.sat_vel);
                Vec8 h_rr = Vec8::Zero();
                h_rr.head<3>() = rj.d_pos;
                h_rr.segment<3>(3) = rj.d_vel;
                h_rr(7) = 1.0;
                const double innov_rr =
                    o.wavelength * o.doppler -
                    (obs::range_rate_expected(lin, o.sat_pos, o.sat_vel) + lin.clk_drift);
                scalar_update(&x, &p, h_rr, innov_rr,
                              cfg.doppler_sigma * cfg.doppler_sigma, cfg.innovation_gate);
            }
        }

        if (!x.allFinite()) {
            throw DivergenceError("ekf_run: non-finite state at epoch " + std::to_string(e));
        }
        obs::EpochState s;
        s.t = t;
        s.pos = x.head<3>();
        s.vel = x.segment<3>(3);
        s.clk_bias = x(6);
        s.clk_drift = x(7);
        out.push_back(s);
        if (diagnostics != nullptr) diagnostics->covariances.push_back(p);
    }
    return out;
}

}  // namespace gnssgnc::baselines
