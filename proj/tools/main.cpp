/* gnssgnc command-line front end: simulate | solve | eval | diagnose. */
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gnssgnc/cli.h"
#include "gnssgnc/errors.h"

namespace {

constexpr int kExitDivergence = 2;
constexpr int kExitInputError = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GNSS positioning with factor-graph optimization and "
                 "graduated non-convexity outlier mitigation"};
    app.require_subcommand(1);

    /* simulate */
    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic scenario");
    std::string sim_config, sim_obs = "observations.csv", sim_truth = "truth.csv";
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false;
    sim_cmd->add_option("--config", sim_config, "scenario config file")->required();
    sim_cmd->add_option("--obs-out", sim_obs, "observations output path");
    sim_cmd->add_option("--truth-out", sim_truth, "truth output path");
    sim_cmd->add_option("--seed", sim_seed, "override the config seed")
        ->each([&sim_seed_set](const std::string&) { sim_seed_set = true; });

    /* solve */
    auto* solve_cmd = app.add_subcommand("solve", "estimate receiver states");
    std::string method, solve_obs, solve_out = "solution.csv";
    std::string weights_out, trace_out;
    gnssgnc::cli::SolveConfig scfg;
    solve_cmd->add_option("--method", method, "wls|ekf|fgo|fgo-cauchy|fgo-gm|fgo-gnc")
        ->required();
    solve_cmd->add_option("--obs", solve_obs, "observations file")->required();
    solve_cmd->add_option("--out", solve_out, "solution output path");
    solve_cmd->add_option("--weights-out", weights_out,
                          "weights output path (robust methods)");
    solve_cmd->add_option("--trace-out", trace_out,
                          "annealing trace output path (fgo-gnc)");
    solve_cmd->add_option("--sigma0", scfg.sigma.sigma0, "sigma model floor, m");
    solve_cmd->add_option("--snr-threshold", scfg.sigma.snr_threshold,
                          "sigma model C/N0 saturation, dB-Hz");
    solve_cmd->add_option("--snr-scale", scfg.sigma.snr_scale,
                          "sigma model C/N0 scale, dB-Hz");
    solve_cmd->add_option("--dv-sigma", scfg.dv.sigma,
                          "Doppler velocity factor sigma, m/s");
    solve_cmd->add_option("--kernel-width", scfg.schedule.c_gm,
                          "robust kernel width c");
    solve_cmd->add_option("--decay", scfg.schedule.decay, "annealing divisor");
    solve_cmd->add_option("--init-multiplier", scfg.schedule.init_multiplier,
                          "initial control parameter coefficient");
    solve_cmd->add_option("--theta0", scfg.schedule.theta,
                          "fixed initial control parameter (0 = derive)");
    solve_cmd->add_flag("--literal-weights", scfg.schedule.literal_weights,
                        "use the unsquared closed-form weight variant");
    solve_cmd->add_option("--max-iterations", scfg.solver.max_outer_iterations,
                          "solver outer iteration cap");
    solve_cmd->add_option("--ekf-vel-psd", scfg.ekf.vel_psd,
                          "velocity process noise PSD, m^2/s^3");
    solve_cmd->add_option("--ekf-clk-bias-psd", scfg.ekf.clk_bias_psd,
                          "clock bias process noise PSD, m^2/s");
    solve_cmd->add_option("--ekf-clk-drift-psd", scfg.ekf.clk_drift_psd,
                          "clock drift process noise PSD, m^2/s^3");
    solve_cmd->add_option("--ekf-doppler-sigma", scfg.ekf.doppler_sigma,
                          "EKF range-rate sigma, m/s");
    solve_cmd->add_option("--ekf-gate", scfg.ekf.innovation_gate,
                          "EKF innovation gate, sigmas (inf = off)");

    /* eval */
    auto* eval_cmd = app.add_subcommand("eval", "score a solution against truth");
    std::string eval_solution, eval_truth, eval_baseline, eval_report = "report.txt";
    eval_cmd->add_option("--solution", eval_solution, "solution file")->required();
    eval_cmd->add_option("--truth", eval_truth, "truth file")->required();
    eval_cmd->add_option("--baseline", eval_baseline,
                         "baseline solution for improvement figures");
    eval_cmd->add_option("--report-out", eval_report, "report output path");

    /* diagnose */
    auto* diag_cmd = app.add_subcommand("diagnose", "analyze robust solve outputs");
    std::string diag_weights, diag_trace, diag_dir = ".";
    gnssgnc::cli::DiagnoseConfig dcfg;
    diag_cmd->add_option("--weights", diag_weights, "weights file")->required();
    diag_cmd->add_option("--trace", diag_trace, "annealing trace file");
    diag_cmd->add_option("--out-dir", diag_dir, "output directory");
    diag_cmd->add_option("--gmm-components", dcfg.gmm_components,
                         "mixture components for the residual fit");
    diag_cmd->add_option("--bins", dcfg.bins, "histogram bins");
    diag_cmd->add_option("--seed", dcfg.seed, "mixture fit seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInputError;
    }

    try {
        if (sim_cmd->parsed()) {
            std::optional<std::uint64_t> seed;
            if (sim_seed_set) seed = sim_seed;
            gnssgnc::cli::run_simulate(sim_config, sim_obs, sim_truth, seed);
        } else if (solve_cmd->parsed()) {
            std::optional<std::string> weights, trace;
            if (!weights_out.empty()) weights = weights_out;
            if (!trace_out.empty()) trace = trace_out;
            gnssgnc::cli::run_solve(method, solve_obs, solve_out, weights, trace, scfg);
        } else if (eval_cmd->parsed()) {
            std::optional<std::string> baseline;
            if (!eval_baseline.empty()) baseline = eval_baseline;
            gnssgnc::cli::run_eval(eval_solution, eval_truth, baseline, eval_report);
        } else if (diag_cmd->parsed()) {
            std::optional<std::string> trace;
            if (!diag_trace.empty()) trace = diag_trace;
            gnssgnc::cli::run_diagnose(diag_weights, trace, diag_dir, dcfg);
        }
    } catch (const gnssgnc::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const gnssgnc::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return 0;
}
