/*
 * gnssgnc — the on-disk interchange formats. Comma-separated, mandatory
 * header row, '.' decimal, LF line endings. Parsing is strict: unknown
 * headers, wrong field counts and malformed numbers are hard errors
 * carrying the file name and line number.
 */
#ifndef GNSSGNC_CSV_H
#define GNSSGNC_CSV_H

#include <string>
#include <utility>
#include <vector>

#include "gnssgnc/obs_model.h"

namespace gnssgnc::csv {

/* observations.csv: t,sat_id,sys,px,py,pz,vx,vy,vz,pseudorange,doppler,
 * wavelength,cn0,label — satellite states inline, one row per
 * satellite-epoch, epoch-major order. */
void write_observations(const std::string& path,
                        const std::vector<std::vector<obs::SatelliteObservation>>& epochs);
/* Groups rows into epochs on change of t; requires strictly increasing
 * epoch times and unique sat_id within an epoch. */
std::vector<std::vector<obs::SatelliteObservation>> read_observations(
    const std::string& path);

/* truth.csv: t,px,py,pz,vx,vy,vz,clk_bias,clk_drift */
void write_truth(const std::string& path, const std::vector<obs::EpochState>& states);
std::vector<obs::EpochState> read_truth(const std::string& path);

/* solution.csv: t,px,py,pz,vx,vy,vz,clk_bias,method */
void write_solution(const std::string& path, const std::vector<obs::EpochState>& states,
                    const std::string& method);
std::vector<obs::EpochState> read_solution(const std::string& path,
                                           std::string* method = nullptr);

/* weights.csv: t,sat_id,weight,residual_m,round — one row per pseudorange
 * factor per recorded robust round, round-major; residual_m is the raw
 * residual in meters at that round's states. */
struct WeightRow {
    double t = 0.0;
    int sat_id = 0;
    double weight = 1.0;
    double residual_m = 0.0;
    int round = 1;
};
void write_weights(const std::string& path, const std::vector<WeightRow>& rows);
std::vector<WeightRow> read_weights(const std::string& path);

/* report: flat key=value lines in the given order. */
void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& entries);
std::vector<std::pair<std::string, std::string>> read_report(const std::string& path);

/* Shortest decimal that round-trips to the identical double; used for
 * every numeric field written by this module. */
std::string format_value(double v);

}  // namespace gnssgnc::csv

#endif
