#include "gnssgnc/graph.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>

#include "gnssgnc/baselines.h"
#include "gnssgnc/errors.h"
#include "gnssgnc/log.h"

namespace gnssgnc::graph {

namespace {

constexpr double kMinLinearizationElevation = 1e-3;  // rad, guards sigma at bad inits

double factor_weight(const WeightSet& weights, int epoch, int sat_id) {
    const auto it = weights.find({epoch, sat_id});
    if (it == weights.end()) return 1.0;
    /* Zero is legal and equivalent to deleting the factor. */
    if (it->second < 0.0 || it->second > 1.0) {
        throw std::invalid_argument("solve: weight outside [0,1] for epoch " +
                                    std::to_string(epoch) + " sat " +
                                    std::to_string(sat_id));
    }
    return it->second;
}

}  // namespace

FactorGraph build_graph(
    const std::vector<std::vector<obs::SatelliteObservation>>& epochs,
    const obs::SigmaModelConfig& sigma_cfg, const DvConfig& dv_cfg) {
    if (epochs.empty()) {
        throw InputError("build_graph: no epochs");
    }
    const int t_count = static_cast<int>(epochs.size());
    for (int t = 0; t < t_count; ++t) {
        if (epochs[t].empty()) {
            throw InputError("build_graph: epoch " + std::to_string(t) +
                             " has no observations");
        }
        if (t > 0 && epochs[t].front().t <= epochs[t - 1].front().t) {
            throw InputError("build_graph: non-increasing epoch times at index " +
                             std::to_string(t));
        }
    }

    FactorGraph g;
    g.states.resize(t_count);
    g.measured_velocity.resize(t_count);

    // snapshot fixes give the linearization point and the sigma elevations
    std::vector<bool> fixed(t_count, false);
    for (int t = 0; t < t_count; ++t) {
        g.states[t].t = epochs[t].front().t;
        try {
            const baselines::WlsFix fix = baselines::wls_position(epochs[t], sigma_cfg);
            g.states[t].pos = fix.pos;
            g.states[t].clk_bias = fix.clk_bias;
            fixed[t] = true;
        } catch (const DivergenceError&) {
            log::debug("build_graph: snapshot fix failed at epoch " + std::to_string(t));
        }
    }
    const auto first_fix = std::find(fixed.begin(), fixed.end(), true);
    if (first_fix == fixed.end()) {
        throw DivergenceError("build_graph: no epoch admits a snapshot fix");
    }
    const int first = static_cast<int>(first_fix - fixed.begin());
    for (int t = first - 1; t >= 0; --t) {
        g.states[t].pos = g.states[first].pos;
        g.states[t].clk_bias = g.states[first].clk_bias;
    }
    for (int t = first + 1; t < t_count; ++t) {
        if (!fixed[t]) {
            g.states[t].pos = g.states[t - 1].pos;
            g.states[t].clk_bias = g.states[t - 1].clk_bias;
        }
    }

    for (int t = 0; t < t_count; ++t) {
        for (const auto& o : epochs[t]) {
            const double el = std::max(
                geo::elevation_azimuth(o.sat_pos, g.states[t].pos).elevation,
                kMinLinearizationElevation);
            PseudorangeFactor f;
            f.epoch = t;
            f.observation = o;
            f.sigma = obs::measurement_sigma(el, o.cn0, sigma_cfg);
            g.pr_factors.push_back(f);
        }
        try {
            const obs::DopplerVelocitySolution v =
                obs::doppler_wls_velocity(epochs[t], g.states[t].pos);
            g.measured_velocity[t] = v;
            g.states[t].vel = v.vel;
            g.states[t].clk_drift = v.clk_drift;
        } catch (const DivergenceError&) {
            log::debug("build_graph: no Doppler velocity at epoch " + std::to_string(t));
        }
    }

    for (int t = 0; t + 1 < t_count; ++t) {
        if (!g.measured_velocity[t].has_value()) continue;
        DopplerVelocityFactor f;
        f.epoch = t;
        f.v_meas = g.measured_velocity[t]->vel;
        f.sigma = dv_cfg.sigma;
        g.dv_factors.push_back(f);
    }

    /* Observability over the chain: dv factors tie runs of epochs together;
     * every run needs at least one epoch with a full-rank pseudorange set,
     * otherwise its positions float. */
    std::vector<bool> linked(std::max(t_count - 1, 0), false);
    for (const auto& f : g.dv_factors) linked[f.epoch] = true;
    int run_start = 0;
    for (int t = 0; t < t_count; ++t) {
        const bool run_end = (t + 1 == t_count) || !linked[t];
        if (!run_end) continue;
        bool anchored = false;
        for (int k = run_start; k <= t; ++k) {
            if (epochs[k].size() >= 4) anchored = true;
        }
        if (!anchored) {
            throw DivergenceError(
                "build_graph: epochs " + std::to_string(run_start) + ".." +
                std::to_string(t) + " have no full-rank pseudorange anchor");
        }
        run_start = t + 1;
    }
    return g;
}

namespace {

struct Linearization {
    Eigen::SparseMatrix<double> h;  // J^T W J, 4x4 blocks on the chain
    Eigen::VectorXd g;              // -J^T W r
};

double weighted_cost(const FactorGraph& graph, const WeightSet& weights,
                     const std::vector<obs::EpochState>& states) {
    double cost = 0.0;
    for (const auto& f : graph.pr_factors) {
        const obs::PseudorangeResidual r =
            obs::pseudorange_residual(f.observation, states[f.epoch], f.sigma);
        cost += factor_weight(weights, f.epoch, f.observation.sat_id) *
                r.value * r.value;
    }
    for (const auto& f : graph.dv_factors) {
        const obs::DopplerVelocityResidual r = obs::doppler_velocity_residual(
            f.v_meas, states[f.epoch], states[f.epoch + 1], f.sigma);
        cost += r.value.squaredNorm();
    }
    return cost;
}

Linearization linearize(const FactorGraph& graph, const WeightSet& weights,
                        const std::vector<obs::EpochState>& states) {
    const int n = 4 * static_cast<int>(states.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(graph.pr_factors.size() * 16 + graph.dv_factors.size() * 12);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);

    for (const auto& f : graph.pr_factors) {
        const obs::PseudorangeResidual r =
            obs::pseudorange_residual(f.observation, states[f.epoch], f.sigma);
        const double w = factor_weight(weights, f.epoch, f.observation.sat_id);
        Eigen::Vector4d d;
        d << r.d_pos, r.d_clk_bias;
        const int base = 4 * f.epoch;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                trip.emplace_back(base + i, base + j, w * d(i) * d(j));
            }
            grad(base + i) -= w * d(i) * r.value;
        }
    }

    for (const auto& f : graph.dv_factors) {
        const obs::DopplerVelocityResidual r = obs::doppler_velocity_residual(
            f.v_meas, states[f.epoch], states[f.epoch + 1], f.sigma);
        const double a = r.d_pos_t;   // d(value_k)/d(pos_t_k)
        const double b = r.d_pos_t1;  // d(value_k)/d(pos_t1_k)
        const int bt = 4 * f.epoch;
        const int bn = 4 * (f.epoch + 1);
        for (int k = 0; k < 3; ++k) {
            trip.emplace_back(bt + k, bt + k, a * a);
            trip.emplace_back(bn + k, bn + k, b * b);
            trip.emplace_back(bt + k, bn + k, a * b);
            trip.emplace_back(bn + k, bt + k, a * b);
            grad(bt + k) -= a * r.value(k);
            grad(bn + k) -= b * r.value(k);
        }
    }

    Linearization lin;
    lin.h.resize(n, n);
    lin.h.setFromTriplets(trip.begin(), trip.end());
    lin.g = std::move(grad);
    return lin;
}

std::vector<obs::EpochState> apply_step(const std::vector<obs::EpochState>& states,
                                        const Eigen::VectorXd& dx) {
    std::vector<obs::EpochState> next = states;
    for (std::size_t t = 0; t < states.size(); ++t) {
        next[t].pos += dx.segment<3>(4 * static_cast<int>(t));
        next[t].clk_bias += dx(4 * static_cast<int>(t) + 3);
    }
    return next;
}

}  // namespace

std::pair<std::vector<obs::EpochState>, SolveReport> solve(
    const FactorGraph& graph, const WeightSet& weights,
    const std::vector<obs::EpochState>& init, const SolveOptions& opts) {
    if (init.size() != graph.states.size()) {
        throw std::invalid_argument("solve: init size does not match graph");
    }
    const int n = 4 * static_cast<int>(init.size());

    std::vector<obs::EpochState> states = init;
    double cost = weighted_cost(graph, weights, states);
    if (!std::isfinite(cost)) {
        throw DivergenceError("solve: non-finite cost at initialization");
    }

    double damping = opts.initial_damping;
    SolveReport report;
    bool converged = false;

    for (int iter = 0; iter < opts.max_outer_iterations && !converged; ++iter) {
        const Linearization lin = linearize(graph, weights, states);
        if (lin.g.norm() < 1e-12) {
            converged = true;
            break;
        }

        bool accepted = false;
        while (!accepted) {
            Eigen::SparseMatrix<double> damped = lin.h;
            for (int i = 0; i < n; ++i) damped.coeffRef(i, i) += damping;
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(damped);
            if (ldlt.info() != Eigen::Success) {
                damping *= opts.damping_up;
                if (damping > opts.max_damping) {
                    throw DivergenceError("solve: normal equations stay singular");
                }
                continue;
            }
            const Eigen::VectorXd dx = ldlt.solve(lin.g);
            const std::vector<obs::EpochState> cand = apply_step(states, dx);
            const double cand_cost = weighted_cost(graph, weights, cand);
            if (!std::isfinite(cand_cost)) {
                throw DivergenceError("solve: non-finite cost at iteration " +
                                      std::to_string(iter));
            }
            if (cand_cost < cost) {
                const double rel = (cost - cand_cost) / std::max(cost, 1e-300);
                states = cand;
                cost = cand_cost;
                damping = std::max(damping * opts.damping_down, 1e-15);
                accepted = true;
                report.iterations = iter + 1;
                if (rel < opts.cost_tolerance) converged = true;
            } else {
                damping *= opts.damping_up;
                if (damping > opts.max_damping) {
                    // no descent direction left: already at a stationary point
                    converged = true;
                    accepted = true;
                }
            }
        }
    }

    for (std::size_t t = 0; t < states.size(); ++t) {
        states[t].t = init[t].t;
        states[t].vel = init[t].vel;
        states[t].clk_drift = init[t].clk_drift;
    }

    const ObjectiveBreakdown breakdown = evaluate_objective(graph, weights, states);
    report.final_cost = breakdown.total;
    report.converged = converged;
    report.residuals = breakdown.residuals;
    return {std::move(states), std::move(report)};
}

ObjectiveBreakdown evaluate_objective(const FactorGraph& graph,
                                      const WeightSet& weights,
                                      const std::vector<obs::EpochState>& states) {
    ObjectiveBreakdown out;
    out.residuals.reserve(graph.pr_factors.size());
    for (const auto& f : graph.pr_factors) {
        const obs::PseudorangeResidual r =
            obs::pseudorange_residual(f.observation, states[f.epoch], f.sigma);
        const double w = factor_weight(weights, f.epoch, f.observation.sat_id);
        out.pr_cost += w * r.value * r.value;
        FactorResidual row;
        row.epoch = f.epoch;
        row.sat_id = f.observation.sat_id;
        row.whitened = r.value;
        row.meters = r.value * f.sigma;
        out.residuals.push_back(row);
    }
    for (const auto& f : graph.dv_factors) {
        const obs::DopplerVelocityResidual r = obs::doppler_velocity_residual(
            f.v_meas, states[f.epoch], states[f.epoch + 1], f.sigma);
        out.dv_cost += r.value.squaredNorm();
    }
    out.total = out.pr_cost + out.dv_cost;
    return out;
}

Eigen::SparseMatrix<double> normal_matrix(const FactorGraph& graph,
                                          const std::vector<obs::EpochState>& states) {
    Eigen::SparseMatrix<double> h = linearize(graph, {}, states).h;
    h.prune(0.0);
    return h;
}

}  // namespace gnssgnc::graph
