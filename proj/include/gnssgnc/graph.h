/*
 * gnssgnc — batch factor graph over the receiver state chain: pseudorange
 * factors per observation, Doppler velocity factors between consecutive
 * epochs, solved by damped Gauss-Newton on the block-tridiagonal normal
 * equations. Per-factor weights let a robust outer loop deflate suspect
 * pseudoranges without touching this module.
 */
#ifndef GNSSGNC_GRAPH_H
#define GNSSGNC_GRAPH_H

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>

#include "gnssgnc/obs_model.h"

namespace gnssgnc {

/* omega in [0,1] keyed by (epoch index, sat_id). Keys missing from the
 * map read as 1 (plain least squares); 0 disables the factor entirely. */
using WeightSet = std::map<std::pair<int, int>, double>;

}  // namespace gnssgnc

namespace gnssgnc::graph {

struct PseudorangeFactor {
    int epoch = 0;  // state index
    obs::SatelliteObservation observation;
    double sigma = 1.0;  // m
};

/* Couples states epoch and epoch+1 through the Doppler-measured velocity. */
struct DopplerVelocityFactor {
    int epoch = 0;
    Eigen::Vector3d v_meas = Eigen::Vector3d::Zero();  // m/s, ECEF
    double sigma = 0.1;  // m/s per axis
};

struct DvConfig {
    double sigma = 0.1;  // m/s per axis
};

struct FactorGraph {
    std::vector<obs::EpochState> states;  // per-epoch initialization
    std::vector<PseudorangeFactor> pr_factors;
    std::vector<DopplerVelocityFactor> dv_factors;
    /* Snapshot Doppler velocity per epoch where it was solvable; carried
     * for output even when the adjacent dv factor is omitted. */
    std::vector<std::optional<obs::DopplerVelocitySolution>> measured_velocity;
};

struct SolveOptions {
    int max_outer_iterations = 50;
    double cost_tolerance = 1e-8;  // relative cost change
    double initial_damping = 1e-4;
    double damping_up = 10.0;
    double damping_down = 0.1;
    double max_damping = 1e12;  // escalation cap before declaring failure
};

struct FactorResidual {
    int epoch = 0;
    int sat_id = 0;
    double whitened = 0.0;  // (measured - predicted) / sigma
    double meters = 0.0;    // measured - predicted
};

struct SolveReport {
    double final_cost = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<FactorResidual> residuals;  // one row per pseudorange factor
};

/* One pseudorange factor per observation, sigma from measurement_sigma at
 * the per-epoch snapshot WLS fix; one Doppler velocity factor per
 * consecutive epoch pair whose snapshot velocity solve succeeded. Epochs
 * where snapshot WLS fails inherit the previous epoch's state (or the
 * first later success when leading epochs fail).
 *
 * Throws InputError on an empty epoch list or an epoch with zero
 * observations; DivergenceError when no epoch admits a snapshot fix or
 * when a dv-connected run of epochs contains no epoch with >= 4
 * pseudorange factors (unobservable chain). */
FactorGraph build_graph(
    const std::vector<std::vector<obs::SatelliteObservation>>& epochs,
    const obs::SigmaModelConfig& sigma_cfg, const DvConfig& dv_cfg = {});

/* Minimizes sum_dv ||e_dv||^2 + sum_pr omega * e_pr^2 over [pos, clk_bias]
 * per epoch by damped Gauss-Newton: a step is accepted only when the total
 * cost decreases, damping shrinks on acceptance and grows on rejection.
 * Velocities and clock drifts of the returned states are copied from init.
 * Throws DivergenceError on non-finite cost or when the damped normal
 * equations stay singular up to max_damping. */
std::pair<std::vector<obs::EpochState>, SolveReport> solve(
    const FactorGraph& graph, const WeightSet& weights,
    const std::vector<obs::EpochState>& init, const SolveOptions& opts = {});

struct ObjectiveBreakdown {
    double total = 0.0;
    double pr_cost = 0.0;  // sum of omega * whitened^2
    double dv_cost = 0.0;  // sum of ||whitened dv residual||^2
    std::vector<FactorResidual> residuals;
};

ObjectiveBreakdown evaluate_objective(const FactorGraph& graph,
                                      const WeightSet& weights,
                                      const std::vector<obs::EpochState>& states);

/* Gauss-Newton normal-equations matrix at the given states, weights all 1,
 * no damping. Exposed so the 4x4-block banded sparsity pattern is testable. */
Eigen::SparseMatrix<double> normal_matrix(const FactorGraph& graph,
                                          const std::vector<obs::EpochState>& states);

}  // namespace gnssgnc::graph

#endif
