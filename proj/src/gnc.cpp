#include "gnssgnc/gnc.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

#include "gnssgnc/errors.h"
#include "gnssgnc/log.h"

namespace gnssgnc::gnc {

double gm_loss(double r, double c_gm) {
    if (c_gm <= 0.0) {
        throw std::invalid_argument("gm_loss: kernel width must be positive");
    }
    const double c2 = c_gm * c_gm;
    return c2 * r * r / (c2 + r * r);
}

double cauchy_loss(double r, double c) {
    if (c <= 0.0) {
        throw std::invalid_argument("cauchy_loss: kernel width must be positive");
    }
    const double c2 = c * c;
    return 0.5 * c2 * std::log1p(r * r / c2);
}

double cauchy_weight(double r, double c) {
    if (c <= 0.0) {
        throw std::invalid_argument("cauchy_weight: kernel width must be positive");
    }
    return 1.0 / (1.0 + r * r / (c * c));
}

double surrogate_loss(double r, double c_gm, double theta) {
    if (c_gm <= 0.0 || theta < 1.0) {
        throw std::invalid_argument("surrogate_loss: need c_gm > 0 and theta >= 1");
    }
    const double tc2 = theta * c_gm * c_gm;
    return tc2 * r * r / (tc2 + r * r);
}

double penalty(double omega, double c_gm, double theta) {
    if (omega <= 0.0 || omega > 1.0) {
        throw std::invalid_argument("penalty: omega must lie in (0,1]");
    }
    const double s = std::sqrt(omega) - 1.0;
    return theta * c_gm * c_gm * s * s;
}

double weight_for_residual(double r, double c_gm, double theta, bool literal_form,
                           double floor) {
    const double tc2 = theta * c_gm * c_gm;
    const double base = tc2 / (tc2 + r * r);
    const double w = literal_form ? base : base * base;
    return std::clamp(w, floor, 1.0);
}

WeightSet update_weights(const std::vector<graph::FactorResidual>& residuals,
                         double c_gm, double theta, bool literal_form, double floor) {
    WeightSet w;
    for (const auto& row : residuals) {
        w[{row.epoch, row.sat_id}] =
            weight_for_residual(row.whitened, c_gm, theta, literal_form, floor);
    }
    return w;
}

double initial_theta(double max_abs_residual, double c_gm, double multiplier) {
    if (c_gm <= 0.0) {
        throw std::invalid_argument("initial_theta: kernel width must be positive");
    }
    return std::max(multiplier * max_abs_residual * max_abs_residual / (c_gm * c_gm),
                    1.0);
}

double robust_objective(const graph::FactorGraph& g, const WeightSet& weights,
                        const std::vector<obs::EpochState>& states, double c_gm,
                        double theta) {
    const graph::ObjectiveBreakdown b = graph::evaluate_objective(g, weights, states);
    double total = b.total;  // dv cost + sum omega * e^2
    for (const auto& f : g.pr_factors) {
        const auto it = weights.find({f.epoch, f.observation.sat_id});
        const double omega = (it == weights.end()) ? 1.0 : it->second;
        total += penalty(omega, c_gm, theta);
    }
    return total;
}

GncResult run_gnc(const graph::FactorGraph& g, const graph::SolveOptions& opts,
                  const GncSchedule& schedule,
                  const std::optional<std::vector<obs::EpochState>>& init) {
    if (schedule.decay <= 1.0) {
        throw std::invalid_argument("run_gnc: decay must exceed 1");
    }
    std::vector<obs::EpochState> states = init.value_or(g.states);
    WeightSet weights;  // empty reads as all-ones

    double theta = schedule.theta;
    if (theta <= 0.0) {
        double e_max = 0.0;
        for (const auto& row : graph::evaluate_objective(g, weights, states).residuals) {
            e_max = std::max(e_max, std::abs(row.whitened));
        }
        theta = initial_theta(e_max, schedule.c_gm, schedule.init_multiplier);
    }
    if (theta < schedule.theta_floor) theta = schedule.theta_floor;

    GncResult out;
    while (true) {
        GncRound round;
        round.theta = theta;
        round.objective_pre_solve =
            robust_objective(g, weights, states, schedule.c_gm, theta);

        graph::SolveReport report;
        try {
            std::tie(states, report) = graph::solve(g, weights, states, opts);
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " (gnc round at theta=" +
                                  std::to_string(theta) + ")");
        }
        round.objective_post_solve =
            robust_objective(g, weights, states, schedule.c_gm, theta);

        weights = update_weights(report.residuals, schedule.c_gm, theta,
                                 schedule.literal_weights, schedule.weight_floor);
        round.objective_post_weights =
            robust_objective(g, weights, states, schedule.c_gm, theta);

        round.weights = weights;
        round.states = states;
        round.residuals = report.residuals;
        out.trace.rounds.push_back(std::move(round));

        if (theta <= schedule.theta_floor) break;
        theta /= schedule.decay;
        if (theta < schedule.theta_floor) theta = schedule.theta_floor;
    }

    out.states = std::move(states);
    out.weights = std::move(weights);
    return out;
}

IrlsResult irls_solve(const graph::FactorGraph& g, const graph::SolveOptions& opts,
                      Kernel kernel, double c,
                      const std::optional<std::vector<obs::EpochState>>& init) {
    std::vector<obs::EpochState> states = init.value_or(g.states);

    /* IRLS is the fixed-point map x -> argmin sum w(r(x)) r^2, so the first
     * solve must see the kernel evaluated at the starting iterate. Seeding
     * with all-ones instead would make round one plain least squares and
     * erase the init on any near-linear problem. */
    const auto kernel_weights = [&](const std::vector<graph::FactorResidual>& rows) {
        WeightSet w;
        for (const auto& row : rows) {
            w[{row.epoch, row.sat_id}] =
                kernel == Kernel::kGemanMcClure
                    ? weight_for_residual(row.whitened, c, 1.0)
                    : std::clamp(cauchy_weight(row.whitened, c), 1e-6, 1.0);
        }
        return w;
    };
    WeightSet weights =
        kernel_weights(graph::evaluate_objective(g, {}, states).residuals);

    const auto robust_cost = [&](const std::vector<graph::FactorResidual>& rows,
                                 double dv_cost) {
        double total = dv_cost;
        for (const auto& row : rows) {
            total += kernel == Kernel::kGemanMcClure ? gm_loss(row.whitened, c)
                                                     : cauchy_loss(row.whitened, c);
        }
        return total;
    };

    IrlsResult out;
    double prev_cost = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 30; ++round) {
        graph::SolveReport report;
        std::tie(states, report) = graph::solve(g, weights, states, opts);

        weights = kernel_weights(report.residuals);

        const graph::ObjectiveBreakdown b =
            graph::evaluate_objective(g, weights, states);
        const double cost = robust_cost(report.residuals, b.dv_cost);
        out.rounds = round + 1;
        out.final_cost = cost;
        if (std::isfinite(prev_cost) &&
            std::abs(prev_cost - cost) < 1e-8 * std::max(prev_cost, 1e-300)) {
            break;
        }
        prev_cost = cost;
    }

    out.states = std::move(states);
    out.weights = std::move(weights);
    return out;
}

}  // namespace gnssgnc::gnc
