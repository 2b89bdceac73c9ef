/*
 * gnssgnc — robust kernels and graduated non-convexity over the factor
 * graph. The control parameter theta inflates the Geman-McClure kernel to
 * a near-quadratic surrogate, then anneals back; each round alternates a
 * fixed-weight graph solve with a closed-form weight update. Fixed-kernel
 * IRLS (Geman-McClure, Cauchy) is provided for comparison runs.
 */
#ifndef GNSSGNC_GNC_H
#define GNSSGNC_GNC_H

#include <optional>
#include <vector>

#include "gnssgnc/graph.h"

namespace gnssgnc::gnc {

/* Geman-McClure loss c^2 r^2 / (c^2 + r^2): quadratic near zero,
 * saturating at c^2. */
double gm_loss(double r, double c_gm);

/* Cauchy loss (c^2/2) ln(1 + r^2/c^2) and its IRLS weight 1/(1 + r^2/c^2). */
double cauchy_loss(double r, double c);
double cauchy_weight(double r, double c);

/* Surrogate theta*c^2*r^2 / (theta*c^2 + r^2): the Geman-McClure loss at
 * theta = 1, approaching r^2 as theta grows. */
double surrogate_loss(double r, double c_gm, double theta);

/* Weight penalty theta*c^2*(sqrt(omega) - 1)^2; zero only at omega = 1.
 * Throws std::invalid_argument for omega outside (0,1]. */
double penalty(double omega, double c_gm, double theta);

/* Minimizer over (0,1] of omega*r^2 + penalty(omega): the closed form is
 * (theta*c^2 / (theta*c^2 + r^2))^2. `literal_form` drops the outer square
 * (a commonly quoted variant that is not the stationary point; kept for
 * comparison runs). Result clamped to [floor, 1]. */
double weight_for_residual(double r, double c_gm, double theta,
                           bool literal_form = false, double floor = 1e-6);

/* Closed-form weight per pseudorange factor from its whitened residual. */
WeightSet update_weights(const std::vector<graph::FactorResidual>& residuals,
                         double c_gm, double theta, bool literal_form = false,
                         double floor = 1e-6);

/* max(multiplier * e_max^2 / c_gm^2, 1): starts every residual inside the
 * convex region of the inflated kernel. */
double initial_theta(double max_abs_residual, double c_gm, double multiplier = 3.0);

struct GncSchedule {
    double c_gm = 2.0;            // kernel width in whitened-residual units
    double theta = 0.0;           // 0 = derive from initial residuals
    double decay = 1.4;           // theta divisor per round
    double theta_floor = 1.0;     // final round runs exactly here
    double init_multiplier = 3.0;
    bool literal_weights = false;  // unsquared weight variant
    double weight_floor = 1e-6;
};

/* Full robust objective at fixed theta:
 * sum_dv ||e_dv||^2 + sum_pr [omega * e^2 + penalty(omega)]. */
double robust_objective(const graph::FactorGraph& g, const WeightSet& weights,
                        const std::vector<obs::EpochState>& states, double c_gm,
                        double theta);

/* One annealing round. Objectives are the robust objective at this round's
 * theta: entering the round, after the fixed-weight solve, and after the
 * weight update. */
struct GncRound {
    double theta = 0.0;
    double objective_pre_solve = 0.0;
    double objective_post_solve = 0.0;
    double objective_post_weights = 0.0;
    WeightSet weights;                             // after the update
    std::vector<obs::EpochState> states;           // after the solve
    std::vector<graph::FactorResidual> residuals;  // at those states
};

struct GncTrace {
    std::vector<GncRound> rounds;
};

struct GncResult {
    std::vector<obs::EpochState> states;
    WeightSet weights;  // final, computed at theta = theta_floor
    GncTrace trace;
};

/* Annealed alternation: start at theta (or the derived value), weights all
 * one; per round solve the weighted graph, update weights in closed form,
 * divide theta by decay; once the division would cross theta_floor, run one
 * last round clamped to the floor. Initial states default to the graph's
 * snapshot initialization. Throws DivergenceError from the inner solver,
 * tagged with the round's theta. */
GncResult run_gnc(const graph::FactorGraph& g, const graph::SolveOptions& opts,
                  const GncSchedule& schedule,
                  const std::optional<std::vector<obs::EpochState>>& init = {});

enum class Kernel { kGemanMcClure, kCauchy };

struct IrlsResult {
    std::vector<obs::EpochState> states;
    WeightSet weights;
    int rounds = 0;
    double final_cost = 0.0;  // robust loss plus dv cost
};

/* Fixed-kernel iteratively reweighted least squares: alternate the weighted
 * solve with kernel weights (Geman-McClure (c^2/(c^2+r^2))^2, Cauchy
 * 1/(1+r^2/c^2)) until the robust cost change falls below 1e-8 relative or
 * 30 rounds. No annealing, so it inherits whatever basin the
 * initialization lands in. */
IrlsResult irls_solve(const graph::FactorGraph& g, const graph::SolveOptions& opts,
                      Kernel kernel, double c = 2.0,
                      const std::optional<std::vector<obs::EpochState>>& init = {});

}  // namespace gnssgnc::gnc

#endif
