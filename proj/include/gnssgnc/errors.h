/*
 * gnssgnc: GNSS pseudorange/Doppler positioning with factor graph
 * optimization and graduated non-convexity outlier de-weighting.
 *
 * errors.h — failure categories shared across the toolkit.
 */
#ifndef GNSSGNC_ERRORS_H
#define GNSSGNC_ERRORS_H

#include <stdexcept>
#include <string>

namespace gnssgnc {

/* Malformed files, unknown config keys, bad rows. CLI exit code 3. */
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/* Estimator failures: rank-deficient geometry, non-finite costs,
 * unobservable graphs, filter blow-up. CLI exit code 2. */
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gnssgnc

#endif
