/*
 * gnssgnc — flat key=value scenario configuration. The schema is strict:
 * an unknown key, malformed value or duplicate key is an error carrying
 * the line number.
 */
#ifndef GNSSGNC_CONFIG_H
#define GNSSGNC_CONFIG_H

#include <string>

#include "gnssgnc/sim.h"

namespace gnssgnc::config {

/* Recognized keys (all optional, defaults in sim::Scenario):
 *   duration_s rate_hz sat_count geometry_seed seed
 *   origin_lat_deg origin_lon_deg origin_height_m
 *   trajectory (static|line|waypoints)
 *   vel_east_mps vel_north_mps vel_up_mps        straight-line velocity
 *   speed_mps waypoints_enu (e:n:u;e:n:u;...)    polyline
 *   clk_bias0_m clk_drift_mps clk_walk_psd
 *   pr_noise_m doppler_noise_hz atmosphere_max_m
 *   cn0_min_dbhz cn0_max_dbhz
 *   outlier_fraction outlier_bias_min_m outlier_bias_max_m outlier_persistence
 * Lines starting with '#' and blank lines are ignored. */
sim::Scenario scenario_from_file(const std::string& path);

}  // namespace gnssgnc::config

#endif
