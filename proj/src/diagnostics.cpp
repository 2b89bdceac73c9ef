#include "gnssgnc/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "gnssgnc/errors.h"
#include "gnssgnc/geo.h"

namespace gnssgnc::diag {

ErrorReport enu_error_stats(const std::vector<obs::EpochState>& solution,
                            const std::vector<obs::EpochState>& truth) {
    if (truth.empty() || solution.empty()) {
        throw InputError("enu_error_stats: empty trajectory");
    }
    double period = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < truth.size(); ++i) {
        const double d = truth[i].t - truth[i - 1].t;
        if (d > 0.0) period = std::min(period, d);
    }
    const double tol = std::isfinite(period) ? 0.5 * period : 0.5;

    ErrorReport out;
    std::size_t cursor = 0;
    for (const auto& s : solution) {
        while (cursor + 1 < truth.size() &&
               std::abs(truth[cursor + 1].t - s.t) <= std::abs(truth[cursor].t - s.t)) {
            ++cursor;
        }
        const obs::EpochState& ref = truth[cursor];
        if (std::abs(ref.t - s.t) > tol) continue;
        const geo::EnuVector e = geo::ecef_to_enu(s.pos, ref.pos);
        EnuErrorRow row;
        row.t = s.t;
        row.east = e.east;
        row.north = e.north;
        row.up = e.up;
        row.err_2d = e.horizontal_norm();
        row.err_3d = e.norm();
        out.per_epoch.push_back(row);
    }
    if (out.per_epoch.empty()) {
        throw InputError("enu_error_stats: no overlapping epochs");
    }

    const double n = static_cast<double>(out.per_epoch.size());
    double s2 = 0.0, s3 = 0.0;
    for (const auto& r : out.per_epoch) {
        s2 += r.err_2d;
        s3 += r.err_3d;
        out.max_2d = std::max(out.max_2d, r.err_2d);
        out.max_3d = std::max(out.max_3d, r.err_3d);
    }
    out.mean_2d = s2 / n;
    out.mean_3d = s3 / n;
    double v2 = 0.0, v3 = 0.0;
    for (const auto& r : out.per_epoch) {
        v2 += (r.err_2d - out.mean_2d) * (r.err_2d - out.mean_2d);
        v3 += (r.err_3d - out.mean_3d) * (r.err_3d - out.mean_3d);
    }
    out.std_2d = std::sqrt(v2 / n);
    out.std_3d = std::sqrt(v3 / n);
    return out;
}

double improvement_percent(double baseline_mean, double method_mean) {
    if (baseline_mean <= 0.0) {
        throw std::invalid_argument("improvement_percent: baseline must be positive");
    }
    return (baseline_mean - method_mean) / baseline_mean * 100.0;
}

namespace {

/* Log-density of N(mean, var) at x. */
double log_gauss(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

}  // namespace

GmmFit gmm_fit(const std::vector<double>& samples, int k, std::uint64_t seed) {
    if (k < 1) {
        throw std::invalid_argument("gmm_fit: need at least one component");
    }
    const int n = static_cast<int>(samples.size());
    const std::set<double> distinct(samples.begin(), samples.end());
    if (static_cast<int>(distinct.size()) < k) {
        throw InputError("gmm_fit: fewer distinct samples than components");
    }

    constexpr double kVarFloor = 1e-6;
    GmmFit fit;
    fit.components.resize(k);

    /* Distance-weighted center seeding: first center uniform, then each
     * next center drawn proportionally to squared distance from the
     * nearest chosen one. */
    std::mt19937_64 eng(seed);
    std::vector<double> centers;
    centers.push_back(samples[std::uniform_int_distribution<int>(0, n - 1)(eng)]);
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const double c : centers) {
                best = std::min(best, (samples[i] - c) * (samples[i] - c));
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            /* all remaining mass sits on chosen centers; pick any distinct value */
            for (const double v : distinct) {
                if (std::find(centers.begin(), centers.end(), v) == centers.end()) {
                    centers.push_back(v);
                    break;
                }
            }
            continue;
        }
        double u = std::uniform_real_distribution<double>(0.0, total)(eng);
        int pick = n - 1;
        for (int i = 0; i < n; ++i) {
            u -= d2[i];
            if (u <= 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(samples[pick]);
    }

    /* Hard-assign to nearest center for the initial moments. */
    std::vector<int> assign(n);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int j = 1; j < k; ++j) {
            if (std::abs(samples[i] - centers[j]) < std::abs(samples[i] - centers[best])) {
                best = j;
            }
        }
        assign[i] = best;
    }
    for (int j = 0; j < k; ++j) {
        double cnt = 0.0, mean = 0.0;
        for (int i = 0; i < n; ++i) {
            if (assign[i] == j) {
                cnt += 1.0;
                mean += samples[i];
            }
        }
        mean = (cnt > 0.0) ? mean / cnt : centers[j];
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            if (assign[i] == j) var += (samples[i] - mean) * (samples[i] - mean);
        }
        var = (cnt > 0.0) ? var / cnt : 0.0;
        if (var < kVarFloor) {
            var = kVarFloor;
            fit.degenerate = true;
        }
        fit.components[j] = {std::max(cnt / n, 1e-12), mean, var};
    }

    std::vector<double> resp(static_cast<std::size_t>(n) * k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 500; ++iter) {
        /* E-step with log-sum-exp per sample. */
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const auto& c = fit.components[j];
                const double lp = std::log(c.weight) + log_gauss(samples[i], c.mean, c.variance);
                resp[i * k + j] = lp;
                mx = std::max(mx, lp);
            }
            double sum = 0.0;
            for (int j = 0; j < k; ++j) sum += std::exp(resp[i * k + j] - mx);
            const double lse = mx + std::log(sum);
            ll += lse;
            for (int j = 0; j < k; ++j) {
                resp[i * k + j] = std::exp(resp[i * k + j] - lse);
            }
        }
        fit.ll_history.push_back(ll);
        fit.log_likelihood = ll;
        fit.iterations = iter + 1;
        if (ll - prev_ll < 1e-8 && iter > 0) break;
        prev_ll = ll;

        /* M-step. */
        for (int j = 0; j < k; ++j) {
            double mass = 0.0, mean = 0.0;
            for (int i = 0; i < n; ++i) {
                mass += resp[i * k + j];
                mean += resp[i * k + j] * samples[i];
            }
            if (mass <= 0.0) {
                fit.degenerate = true;
                continue;  // starved component keeps its parameters
            }
            mean /= mass;
            double var = 0.0;
            for (int i = 0; i < n; ++i) {
                var += resp[i * k + j] * (samples[i] - mean) * (samples[i] - mean);
            }
            var /= mass;
            if (var < kVarFloor) {
                var = kVarFloor;
                fit.degenerate = true;
            }
            fit.components[j] = {mass / n, mean, var};
        }
    }
    return fit;
}

std::vector<int> weight_histogram(const WeightSet& weights, int bins) {
    if (bins < 1) {
        throw std::invalid_argument("weight_histogram: need at least one bin");
    }
    if (weights.empty()) {
        throw InputError("weight_histogram: empty weight set");
    }
    std::vector<int> counts(bins, 0);
    for (const auto& [key, w] : weights) {
        int b = static_cast<int>(w * bins);
        b = std::clamp(b, 0, bins - 1);
        ++counts[b];
    }
    return counts;
}

DetectionScore outlier_detection_score(
    const WeightSet& weights,
    const std::map<std::pair<int, int>, obs::Label>& labels, double threshold) {
    if (weights.empty()) {
        throw InputError("outlier_detection_score: empty weight set");
    }
    DetectionScore s;
    for (const auto& [key, w] : weights) {
        const auto it = labels.find(key);
        if (it == labels.end()) {
            throw InputError("outlier_detection_score: unlabeled measurement");
        }
        const bool actual = it->second == obs::Label::kNlos ||
                            it->second == obs::Label::kMultipath;
        const bool predicted = w < threshold;
        if (predicted && actual) ++s.true_positives;
        if (predicted && !actual) ++s.false_positives;
        if (!predicted && actual) ++s.false_negatives;
    }
    const int pred = s.true_positives + s.false_positives;
    const int act = s.true_positives + s.false_negatives;
    s.precision = (pred > 0) ? static_cast<double>(s.true_positives) / pred : 1.0;
    s.recall = (act > 0) ? static_cast<double>(s.true_positives) / act : 1.0;
    return s;
}

}  // namespace gnssgnc::diag
