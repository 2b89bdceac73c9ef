#include "gnssgnc/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "gnssgnc/errors.h"

namespace gnssgnc::config {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

std::string location(const std::string& path, int line) {
    return path + ":" + std::to_string(line) + ": ";
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& path, int line) {
    double out = 0.0;
    const char* begin = v.data();
    const char* end = begin + v.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end || v.empty()) {
        throw InputError(location(path, line) + "malformed number '" + v + "'");
    }
    return out;
}

long long to_int(const std::string& v, const std::string& path, int line) {
    long long out = 0;
    const char* begin = v.data();
    const char* end = begin + v.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end || v.empty()) {
        throw InputError(location(path, line) + "malformed integer '" + v + "'");
    }
    return out;
}

std::uint64_t to_seed(const std::string& v, const std::string& path, int line) {
    std::uint64_t out = 0;
    const char* begin = v.data();
    const char* end = begin + v.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end || v.empty()) {
        throw InputError(location(path, line) + "malformed seed '" + v + "'");
    }
    return out;
}

std::vector<Eigen::Vector3d> to_waypoints(const std::string& v, const std::string& path,
                                          int line) {
    std::vector<Eigen::Vector3d> out;
    std::string item;
    std::vector<std::string> items;
    for (const char c : v) {
        if (c == ';') {
            items.push_back(item);
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    if (!item.empty()) items.push_back(item);
    for (const auto& wp : items) {
        std::vector<std::string> parts;
        std::string p;
        for (const char c : wp) {
            if (c == ':') {
                parts.push_back(p);
                p.clear();
            } else {
                p.push_back(c);
            }
        }
        parts.push_back(p);
        if (parts.size() != 3) {
            throw InputError(location(path, line) + "waypoint '" + wp +
                             "' must be east:north:up");
        }
        out.emplace_back(to_double(parts[0], path, line), to_double(parts[1], path, line),
                         to_double(parts[2], path, line));
    }
    if (out.empty()) {
        throw InputError(location(path, line) + "empty waypoint list");
    }
    return out;
}

}  // namespace

sim::Scenario scenario_from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path);
    }

    sim::Scenario sc;
    double lat_deg = sc.origin.lat / kDegToRad;
    double lon_deg = sc.origin.lon / kDegToRad;
    std::set<std::string> seen;

    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError(location(path, line_no) + "expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw InputError(location(path, line_no) + "empty key");
        }
        if (!seen.insert(key).second) {
            throw InputError(location(path, line_no) + "duplicate key '" + key + "'");
        }

        if (key == "duration_s") {
            sc.duration = to_double(value, path, line_no);
        } else if (key == "rate_hz") {
            sc.rate = to_double(value, path, line_no);
        } else if (key == "sat_count") {
            sc.sat_count = static_cast<int>(to_int(value, path, line_no));
        } else if (key == "geometry_seed") {
            sc.geometry_seed = to_seed(value, path, line_no);
        } else if (key == "seed") {
            sc.seed = to_seed(value, path, line_no);
        } else if (key == "origin_lat_deg") {
            lat_deg = to_double(value, path, line_no);
        } else if (key == "origin_lon_deg") {
            lon_deg = to_double(value, path, line_no);
        } else if (key == "origin_height_m") {
            sc.origin.height = to_double(value, path, line_no);
        } else if (key == "trajectory") {
            if (value == "static") {
                sc.trajectory.type = sim::TrajectoryType::kStatic;
            } else if (value == "line") {
                sc.trajectory.type = sim::TrajectoryType::kStraightLine;
            } else if (value == "waypoints") {
                sc.trajectory.type = sim::TrajectoryType::kWaypoints;
            } else {
                throw InputError(location(path, line_no) + "unknown trajectory '" +
                                 value + "'");
            }
        } else if (key == "vel_east_mps") {
            sc.trajectory.enu_velocity.x() = to_double(value, path, line_no);
        } else if (key == "vel_north_mps") {
            sc.trajectory.enu_velocity.y() = to_double(value, path, line_no);
        } else if (key == "vel_up_mps") {
            sc.trajectory.enu_velocity.z() = to_double(value, path, line_no);
        } else if (key == "speed_mps") {
            sc.trajectory.speed = to_double(value, path, line_no);
        } else if (key == "waypoints_enu") {
            sc.trajectory.waypoints = to_waypoints(value, path, line_no);
        } else if (key == "clk_bias0_m") {
            sc.clock.bias0 = to_double(value, path, line_no);
        } else if (key == "clk_drift_mps") {
            sc.clock.drift = to_double(value, path, line_no);
        } else if (key == "clk_walk_psd") {
            sc.clock.walk_psd = to_double(value, path, line_no);
        } else if (key == "pr_noise_m") {
            sc.pr_noise_sigma = to_double(value, path, line_no);
        } else if (key == "doppler_noise_hz") {
            sc.doppler_noise_sigma = to_double(value, path, line_no);
        } else if (key == "atmosphere_max_m") {
            sc.atmosphere_max = to_double(value, path, line_no);
        } else if (key == "cn0_min_dbhz") {
            sc.cn0_min = to_double(value, path, line_no);
        } else if (key == "cn0_max_dbhz") {
            sc.cn0_max = to_double(value, path, line_no);
        } else if (key == "outlier_fraction") {
            sc.outliers.fraction = to_double(value, path, line_no);
        } else if (key == "outlier_bias_min_m") {
            sc.outliers.bias_min = to_double(value, path, line_no);
        } else if (key == "outlier_bias_max_m") {
            sc.outliers.bias_max = to_double(value, path, line_no);
        } else if (key == "outlier_persistence") {
            sc.outliers.persistence = static_cast<int>(to_int(value, path, line_no));
        } else {
            throw InputError(location(path, line_no) + "unknown key '" + key + "'");
        }
    }

    sc.origin.lat = lat_deg * kDegToRad;
    sc.origin.lon = lon_deg * kDegToRad;
    return sc;
}

}  // namespace gnssgnc::config
