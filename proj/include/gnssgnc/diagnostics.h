/*
 * gnssgnc — evaluation and analysis: local-frame error statistics,
 * residual-histogram Gaussian mixture fits, weight histograms and
 * weight-threshold outlier detection scoring.
 */
#ifndef GNSSGNC_DIAGNOSTICS_H
#define GNSSGNC_DIAGNOSTICS_H

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "gnssgnc/graph.h"
#include "gnssgnc/obs_model.h"

namespace gnssgnc::diag {

struct EnuErrorRow {
    double t = 0.0;
    double east = 0.0;   // solution minus truth, m
    double north = 0.0;
    double up = 0.0;
    double err_2d = 0.0;
    double err_3d = 0.0;
};

struct ErrorReport {
    std::vector<EnuErrorRow> per_epoch;
    double mean_2d = 0.0, std_2d = 0.0, max_2d = 0.0;  // m
    double mean_3d = 0.0, std_3d = 0.0, max_3d = 0.0;
};

/* Pairs solution and truth epochs by nearest timestamp within half the
 * truth sampling period; errors are expressed in the ENU frame anchored at
 * each epoch's truth position. Throws InputError when nothing aligns. */
ErrorReport enu_error_stats(const std::vector<obs::EpochState>& solution,
                            const std::vector<obs::EpochState>& truth);

/* (baseline - method) / baseline * 100. */
double improvement_percent(double baseline_mean, double method_mean);

struct GmmComponent {
    double weight = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

struct GmmFit {
    std::vector<GmmComponent> components;
    double log_likelihood = 0.0;
    int iterations = 0;
    std::vector<double> ll_history;  // one entry per EM iteration
    bool degenerate = false;         // variance floor engaged
};

/* 1-D expectation-maximization with distance-weighted seeded centers.
 * Stops when the log-likelihood gain drops below 1e-8 or after 500
 * iterations; variances floored at 1e-6. Throws InputError with fewer
 * than k distinct samples. */
GmmFit gmm_fit(const std::vector<double>& samples, int k = 3,
               std::uint64_t seed = 1);

/* Uniform bins over [0,1]; a weight of exactly 1 lands in the last bin.
 * Throws InputError on an empty set. */
std::vector<int> weight_histogram(const WeightSet& weights, int bins = 20);

struct DetectionScore {
    double precision = 0.0;  // 1.0 when nothing is predicted
    double recall = 0.0;     // 1.0 when nothing is labeled
    int true_positives = 0;
    int false_positives = 0;
    int false_negatives = 0;
};

/* Predicted outlier = weight < threshold; actual = label NLOS or MP.
 * Throws InputError when a weighted measurement has no label. */
DetectionScore outlier_detection_score(
    const WeightSet& weights,
    const std::map<std::pair<int, int>, obs::Label>& labels,
    double threshold = 0.4);

}  // namespace gnssgnc::diag

#endif
