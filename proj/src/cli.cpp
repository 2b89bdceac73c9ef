#include "gnssgnc/cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "gnssgnc/config.h"
#include "gnssgnc/csv.h"
#include "gnssgnc/diagnostics.h"
#include "gnssgnc/errors.h"
#include "gnssgnc/log.h"
#include "gnssgnc/sim.h"

namespace gnssgnc::cli {

namespace {

constexpr char kTraceHeader[] =
    "round,theta,objective_pre_solve,objective_post_solve,objective_post_weights";

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    out << content;
    if (!out) {
        throw InputError("write failed for " + path);
    }
}

std::vector<csv::WeightRow> weight_rows_for_round(
    const graph::FactorGraph& g, const std::vector<graph::FactorResidual>& residuals,
    const WeightSet& weights, int round) {
    std::vector<csv::WeightRow> rows;
    rows.reserve(residuals.size());
    for (const auto& r : residuals) {
        csv::WeightRow row;
        row.t = g.states[r.epoch].t;
        row.sat_id = r.sat_id;
        const auto it = weights.find({r.epoch, r.sat_id});
        row.weight = (it == weights.end()) ? 1.0 : it->second;
        row.residual_m = r.meters;
        row.round = round;
        rows.push_back(row);
    }
    return rows;
}

/* Positions and clock from the solver output; velocities and drift from
 * the per-epoch Doppler snapshot where one exists. */
void fill_velocities(const graph::FactorGraph& g, std::vector<obs::EpochState>* states) {
    for (std::size_t t = 0; t < states->size(); ++t) {
        if (g.measured_velocity[t].has_value()) {
            (*states)[t].vel = g.measured_velocity[t]->vel;
            (*states)[t].clk_drift = g.measured_velocity[t]->clk_drift;
        } else {
            (*states)[t].vel = Eigen::Vector3d::Zero();
            (*states)[t].clk_drift = 0.0;
        }
    }
}

}  // namespace

bool is_known_method(const std::string& method) {
    static const std::set<std::string> kMethods = {"wls",       "ekf",    "fgo",
                                                   "fgo-cauchy", "fgo-gm", "fgo-gnc"};
    return kMethods.count(method) > 0;
}

void run_simulate(const std::string& config_path, const std::string& obs_out,
                  const std::string& truth_out,
                  std::optional<std::uint64_t> seed_override) {
    sim::Scenario sc = config::scenario_from_file(config_path);
    if (seed_override.has_value()) sc.seed = *seed_override;

    const sim::SimTruth truth = sim::generate_scenario(sc);
    const sim::SynthesisResult synth = sim::synthesize_observations(truth, sc);

    csv::write_observations(obs_out, synth.epochs);
    csv::write_truth(truth_out, truth.states);

    std::size_t outliers = 0;
    for (const auto& rec : synth.budget) {
        if (rec.label != obs::Label::kLos) ++outliers;
    }
    std::cout << "simulated " << truth.states.size() << " epochs, " << sc.sat_count
              << " satellites, " << outliers << " flagged cells (seed " << sc.seed
              << ")\n";
}

void run_solve(const std::string& method, const std::string& obs_path,
               const std::string& solution_out,
               const std::optional<std::string>& weights_out,
               const std::optional<std::string>& trace_out, const SolveConfig& cfg) {
    if (!is_known_method(method)) {
        throw InputError("unknown method '" + method + "'");
    }
    const auto epochs = csv::read_observations(obs_path);

    std::vector<obs::EpochState> states;
    std::vector<csv::WeightRow> weight_rows;
    std::string trace_content;

    if (method == "wls") {
        states.reserve(epochs.size());
        for (const auto& epoch : epochs) {
            const baselines::WlsFix fix = baselines::wls_position(epoch, cfg.sigma);
            obs::EpochState s;
            s.t = epoch.front().t;
            s.pos = fix.pos;
            s.clk_bias = fix.clk_bias;
            try {
                const obs::DopplerVelocitySolution v =
                    obs::doppler_wls_velocity(epoch, fix.pos);
                s.vel = v.vel;
                s.clk_drift = v.clk_drift;
            } catch (const DivergenceError&) {
                log::debug("wls: no velocity solution at t=" + std::to_string(s.t));
            }
            states.push_back(s);
        }
    } else if (method == "ekf") {
        states = baselines::ekf_run(epochs, cfg.ekf, cfg.sigma);
    } else {
        const graph::FactorGraph g = graph::build_graph(epochs, cfg.sigma, cfg.dv);
        if (method == "fgo") {
            auto [solved, report] = graph::solve(g, {}, g.states, cfg.solver);
            states = std::move(solved);
        } else if (method == "fgo-gm" || method == "fgo-cauchy") {
            const gnc::Kernel kernel = (method == "fgo-gm") ? gnc::Kernel::kGemanMcClure
                                                            : gnc::Kernel::kCauchy;
            const gnc::IrlsResult r =
                gnc::irls_solve(g, cfg.solver, kernel, cfg.schedule.c_gm);
            states = r.states;
            const auto breakdown = graph::evaluate_objective(g, r.weights, r.states);
            weight_rows = weight_rows_for_round(g, breakdown.residuals, r.weights,
                                                r.rounds);
        } else {  // fgo-gnc
            const gnc::GncResult r = gnc::run_gnc(g, cfg.solver, cfg.schedule);
            states = r.states;
            for (std::size_t i = 0; i < r.trace.rounds.size(); ++i) {
                const auto rows = weight_rows_for_round(
                    g, r.trace.rounds[i].residuals, r.trace.rounds[i].weights,
                    static_cast<int>(i) + 1);
                weight_rows.insert(weight_rows.end(), rows.begin(), rows.end());
            }
            if (trace_out.has_value()) {
                std::ostringstream tr;
                tr << kTraceHeader << "\n";
                for (std::size_t i = 0; i < r.trace.rounds.size(); ++i) {
                    const auto& round = r.trace.rounds[i];
                    tr << (i + 1) << ',' << csv::format_value(round.theta) << ','
                       << csv::format_value(round.objective_pre_solve) << ','
                       << csv::format_value(round.objective_post_solve) << ','
                       << csv::format_value(round.objective_post_weights) << "\n";
                }
                trace_content = tr.str();
            }
        }
        fill_velocities(g, &states);
    }

    csv::write_solution(solution_out, states, method);
    const bool robust =
        method == "fgo-gm" || method == "fgo-cauchy" || method == "fgo-gnc";
    if (robust && weights_out.has_value()) {
        csv::write_weights(*weights_out, weight_rows);
    }
    if (!trace_content.empty() && trace_out.has_value()) {
        write_file(*trace_out, trace_content);
    }
    std::cout << "solved " << states.size() << " epochs with " << method << "\n";
}

void run_eval(const std::string& solution_path, const std::string& truth_path,
              const std::optional<std::string>& baseline_path,
              const std::string& report_out) {
    std::string method;
    const std::vector<obs::EpochState> solution =
        csv::read_solution(solution_path, &method);
    const std::vector<obs::EpochState> truth = csv::read_truth(truth_path);
    const diag::ErrorReport rep = diag::enu_error_stats(solution, truth);

    std::vector<std::pair<std::string, std::string>> entries;
    entries.emplace_back("method", method);
    entries.emplace_back("epochs", std::to_string(rep.per_epoch.size()));
    entries.emplace_back("mean_2d_m", csv::format_value(rep.mean_2d));
    entries.emplace_back("std_2d_m", csv::format_value(rep.std_2d));
    entries.emplace_back("max_2d_m", csv::format_value(rep.max_2d));
    entries.emplace_back("mean_3d_m", csv::format_value(rep.mean_3d));
    entries.emplace_back("std_3d_m", csv::format_value(rep.std_3d));
    entries.emplace_back("max_3d_m", csv::format_value(rep.max_3d));

    if (baseline_path.has_value()) {
        std::string baseline_method;
        const std::vector<obs::EpochState> baseline =
            csv::read_solution(*baseline_path, &baseline_method);
        const diag::ErrorReport base = diag::enu_error_stats(baseline, truth);
        entries.emplace_back("baseline_method", baseline_method);
        entries.emplace_back("baseline_mean_2d_m", csv::format_value(base.mean_2d));
        entries.emplace_back("baseline_mean_3d_m", csv::format_value(base.mean_3d));
        entries.emplace_back(
            "improvement_2d_pct",
            csv::format_value(diag::improvement_percent(base.mean_2d, rep.mean_2d)));
        entries.emplace_back(
            "improvement_3d_pct",
            csv::format_value(diag::improvement_percent(base.mean_3d, rep.mean_3d)));
    }
    csv::write_report(report_out, entries);
    std::cout << "evaluated " << rep.per_epoch.size() << " epochs of " << method << "\n";
}

namespace {

std::string histogram_csv(const std::vector<double>& lo, const std::vector<double>& hi,
                          const std::vector<int>& counts) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out << csv::format_value(lo[i]) << ',' << csv::format_value(hi[i]) << ',' << counts[i]
            << "\n";
    }
    return out.str();
}

}  // namespace

void run_diagnose(const std::string& weights_path,
                  const std::optional<std::string>& trace_path,
                  const std::string& out_dir, const DiagnoseConfig& cfg) {
    if (cfg.gmm_components < 1 || cfg.bins < 1) {
        throw InputError("diagnose: components and bins must be positive");
    }
    const std::vector<csv::WeightRow> rows = csv::read_weights(weights_path);
    int final_round = 0;
    for (const auto& r : rows) final_round = std::max(final_round, r.round);

    /* Epoch index by order of first appearance of each timestamp. */
    std::map<double, int> epoch_of;
    for (const auto& r : rows) {
        epoch_of.emplace(r.t, 0);
    }
    int idx = 0;
    for (auto& [t, i] : epoch_of) i = idx++;

    WeightSet final_weights;
    std::vector<double> final_residuals;
    for (const auto& r : rows) {
        if (r.round != final_round) continue;
        final_weights[{epoch_of.at(r.t), r.sat_id}] = r.weight;
        final_residuals.push_back(r.residual_m);
    }
    if (final_weights.empty()) {
        throw InputError(weights_path + ": no rows in the final round");
    }

    std::filesystem::create_directories(out_dir);
    const auto out_path = [&out_dir](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    {
        const std::vector<int> counts = diag::weight_histogram(final_weights, cfg.bins);
        std::vector<double> lo(cfg.bins), hi(cfg.bins);
        for (int i = 0; i < cfg.bins; ++i) {
            lo[i] = static_cast<double>(i) / cfg.bins;
            hi[i] = static_cast<double>(i + 1) / cfg.bins;
        }
        write_file(out_path("weight_histogram.csv"), histogram_csv(lo, hi, counts));
    }

    {
        double mn = *std::min_element(final_residuals.begin(), final_residuals.end());
        double mx = *std::max_element(final_residuals.begin(), final_residuals.end());
        if (mn == mx) {
            mn -= 0.5;
            mx += 0.5;
        }
        const double width = (mx - mn) / cfg.bins;
        std::vector<int> counts(cfg.bins, 0);
        std::vector<double> lo(cfg.bins), hi(cfg.bins);
        for (int i = 0; i < cfg.bins; ++i) {
            lo[i] = mn + i * width;
            hi[i] = mn + (i + 1) * width;
        }
        for (const double r : final_residuals) {
            int b = static_cast<int>((r - mn) / width);
            b = std::clamp(b, 0, cfg.bins - 1);
            ++counts[b];
        }
        write_file(out_path("residual_histogram.csv"), histogram_csv(lo, hi, counts));
    }

    {
        const diag::GmmFit fit =
            diag::gmm_fit(final_residuals, cfg.gmm_components, cfg.seed);
        std::ostringstream out;
        out << "component,weight,mean,variance,log_likelihood,iterations\n";
        for (std::size_t i = 0; i < fit.components.size(); ++i) {
            const auto& c = fit.components[i];
            out << i << ',' << csv::format_value(c.weight) << ',' << csv::format_value(c.mean)
                << ',' << csv::format_value(c.variance) << ','
                << csv::format_value(fit.log_likelihood) << ',' << fit.iterations << "\n";
        }
        write_file(out_path("gmm_components.csv"), out.str());
    }

    if (trace_path.has_value()) {
        std::ifstream in(*trace_path, std::ios::binary);
        if (!in) {
            throw InputError("cannot open " + *trace_path);
        }
        std::string line;
        std::vector<std::string> lines;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) lines.push_back(line);
        }
        if (lines.empty() || lines.front() != kTraceHeader) {
            throw InputError(*trace_path + ":1: expected header '" +
                             std::string(kTraceHeader) + "'");
        }
        double prev_theta = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < lines.size(); ++i) {
            std::string field = lines[i];
            const auto first = field.find(',');
            const auto second = field.find(',', first + 1);
            if (first == std::string::npos || second == std::string::npos) {
                throw InputError(*trace_path + ":" + std::to_string(i + 1) +
                                 ": malformed trace row");
            }
            const std::string theta_str = field.substr(first + 1, second - first - 1);
            double theta = 0.0;
            const char* b = theta_str.data();
            const auto [p, ec] = std::from_chars(b, b + theta_str.size(), theta);
            if (ec != std::errc() || p != b + theta_str.size()) {
                throw InputError(*trace_path + ":" + std::to_string(i + 1) +
                                 ": malformed theta");
            }
            if (i > 1 && theta >= prev_theta) {
                throw InputError(*trace_path + ":" + std::to_string(i + 1) +
                                 ": theta must strictly decrease");
            }
            prev_theta = theta;
        }
        std::ostringstream out;
        for (const auto& l : lines) out << l << "\n";
        write_file(out_path("gnc_trace_table.csv"), out.str());
    }
    std::cout << "diagnosed " << final_weights.size() << " weighted factors over "
              << final_round << " rounds\n";
}

}  // namespace gnssgnc::cli
