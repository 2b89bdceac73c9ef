/*
 * gnssgnc — command pipelines behind the binary: simulate, solve, eval,
 * diagnose. Each function does one file-in/file-out pipeline and throws
 * InputError / DivergenceError; the executable maps those to exit codes
 * 3 and 2. Outputs are written only after the pipeline has fully
 * succeeded, so a failed run leaves no partial files.
 */
#ifndef GNSSGNC_CLI_H
#define GNSSGNC_CLI_H

#include <cstdint>
#include <optional>
#include <string>

#include "gnssgnc/baselines.h"
#include "gnssgnc/gnc.h"
#include "gnssgnc/graph.h"
#include "gnssgnc/obs_model.h"

namespace gnssgnc::cli {

/* wls | ekf | fgo | fgo-cauchy | fgo-gm | fgo-gnc */
bool is_known_method(const std::string& method);

struct SolveConfig {
    obs::SigmaModelConfig sigma;
    graph::DvConfig dv;
    graph::SolveOptions solver;
    gnc::GncSchedule schedule;  // kernel width doubles as the IRLS width
    baselines::EkfConfig ekf;
};

/* Reads the scenario config, generates and synthesizes, writes
 * observations.csv and truth.csv, prints a one-line summary to stdout. */
void run_simulate(const std::string& config_path, const std::string& obs_out,
                  const std::string& truth_out,
                  std::optional<std::uint64_t> seed_override = {});

/* Solves the observation file with the chosen method and writes
 * solution.csv. Robust methods additionally write weights.csv when
 * weights_out is given (required for them by the executable); fgo-gnc
 * optionally writes a per-round trace table. */
void run_solve(const std::string& method, const std::string& obs_path,
               const std::string& solution_out,
               const std::optional<std::string>& weights_out,
               const std::optional<std::string>& trace_out, const SolveConfig& cfg);

/* Error statistics of a solution against truth, optionally with a second
 * solution as improvement baseline; writes a flat key=value report. */
void run_eval(const std::string& solution_path, const std::string& truth_path,
              const std::optional<std::string>& baseline_path,
              const std::string& report_out);

struct DiagnoseConfig {
    int gmm_components = 3;
    int bins = 20;
    std::uint64_t seed = 1;
};

/* From weights.csv (and optionally the solve trace): weight histogram,
 * final-round residual histogram, Gaussian-mixture parameters of the
 * residuals, and a validated copy of the annealing trace. */
void run_diagnose(const std::string& weights_path,
                  const std::optional<std::string>& trace_path,
                  const std::string& out_dir, const DiagnoseConfig& cfg);

}  // namespace gnssgnc::cli

#endif
