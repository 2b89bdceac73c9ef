#include "gnssgnc/csv.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gnssgnc/errors.h"

namespace gnssgnc::csv {

namespace {

std::string location(const std::string& path, int line) {
    return path + ":" + std::to_string(line) + ": ";
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

double parse_double(const std::string& s, const std::string& path, int line,
                    const char* column) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw InputError(location(path, line) + "malformed number in column '" +
                         column + "': '" + s + "'");
    }
    return v;
}

int parse_int(const std::string& s, const std::string& path, int line,
              const char* column) {
    int v = 0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw InputError(location(path, line) + "malformed integer in column '" +
                         column + "': '" + s + "'");
    }
    return v;
}

/* Reads all lines, LF or CRLF tolerated on input; blank trailing line ok. */
std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

void expect_header(const std::vector<std::string>& lines, const std::string& path,
                   const char* header) {
    if (lines.empty()) {
        throw InputError(path + ": empty file");
    }
    if (lines.front() != header) {
        throw InputError(location(path, 1) + "expected header '" + header +
                         "', got '" + lines.front() + "'");
    }
}

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

constexpr char kObsHeader[] =
    "t,sat_id,sys,px,py,pz,vx,vy,vz,pseudorange,doppler,wavelength,cn0,label";
constexpr char kTruthHeader[] = "t,px,py,pz,vx,vy,vz,clk_bias,clk_drift";
constexpr char kSolutionHeader[] = "t,px,py,pz,vx,vy,vz,clk_bias,method";
constexpr char kWeightsHeader[] = "t,sat_id,weight,residual_m,round";

}  // namespace

std::string format_value(double v) {
    /* Shortest decimal that parses back to the identical double. Downstream
     * consumers re-evaluate the measurement model on file contents, so any
     * loss here would show up as a pseudo-bias in the residuals. */
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_observations(
    const std::string& path,
    const std::vector<std::vector<obs::SatelliteObservation>>& epochs) {
    std::ostringstream out;
    out << kObsHeader << "\n";
    for (const auto& epoch : epochs) {
        for (const auto& o : epoch) {
            out << format_value(o.t) << ',' << o.sat_id << ',' << obs::to_string(o.system)
                << ',' << format_value(o.sat_pos.x()) << ',' << format_value(o.sat_pos.y())
                << ',' << format_value(o.sat_pos.z()) << ',' << format_value(o.sat_vel.x())
                << ',' << format_value(o.sat_vel.y()) << ',' << format_value(o.sat_vel.z())
                << ',' << format_value(o.pseudorange) << ',' << format_value(o.doppler)
                << ',' << format_value(o.wavelength) << ',' << format_value(o.cn0) << ','
                << obs::to_string(o.label) << "\n";
        }
    }
    write_file(path, out.str());
}

std::vector<std::vector<obs::SatelliteObservation>> read_observations(
    const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    expect_header(lines, path, kObsHeader);

    std::vector<std::vector<obs::SatelliteObservation>> epochs;
    std::set<int> seen_ids;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty() && i + 1 == lines.size()) break;
        const int line_no = static_cast<int>(i) + 1;
        const std::vector<std::string> f = split_fields(lines[i]);
        if (f.size() != 14) {
            throw InputError(location(path, line_no) + "expected 14 fields, got " +
                             std::to_string(f.size()));
        }
        obs::SatelliteObservation o;
        o.t = parse_double(f[0], path, line_no, "t");
        o.sat_id = parse_int(f[1], path, line_no, "sat_id");
        try {
            o.system = obs::system_from_string(f[2]);
            o.label = obs::label_from_string(f[13]);
        } catch (const InputError& e) {
            throw InputError(location(path, line_no) + e.what());
        }
        o.sat_pos = {parse_double(f[3], path, line_no, "px"),
                     parse_double(f[4], path, line_no, "py"),
                     parse_double(f[5], path, line_no, "pz")};
        o.sat_vel = {parse_double(f[6], path, line_no, "vx"),
                     parse_double(f[7], path, line_no, "vy"),
                     parse_double(f[8], path, line_no, "vz")};
        o.pseudorange = parse_double(f[9], path, line_no, "pseudorange");
        o.doppler = parse_double(f[10], path, line_no, "doppler");
        o.wavelength = parse_double(f[11], path, line_no, "wavelength");
        o.cn0 = parse_double(f[12], path, line_no, "cn0");

        if (epochs.empty() || o.t != epochs.back().front().t) {
            if (!epochs.empty() && o.t <= epochs.back().front().t) {
                throw InputError(location(path, line_no) +
                                 "epoch times must be strictly increasing");
            }
            epochs.emplace_back();
            seen_ids.clear();
        }
        if (!seen_ids.insert(o.sat_id).second) {
            throw InputError(location(path, line_no) + "duplicate sat_id " +
                             std::to_string(o.sat_id) + " within epoch");
        }
        epochs.back().push_back(o);
    }
    if (epochs.empty()) {
        throw InputError(path + ": no observation rows");
    }
    return epochs;
}

void write_truth(const std::string& path, const std::vector<obs::EpochState>& states) {
    std::ostringstream out;
    out << kTruthHeader << "\n";
    for (const auto& s : states) {
        out << format_value(s.t) << ',' << format_value(s.pos.x()) << ','
            << format_value(s.pos.y()) << ',' << format_value(s.pos.z()) << ','
            << format_value(s.vel.x()) << ',' << format_value(s.vel.y()) << ','
            << format_value(s.vel.z()) << ',' << format_value(s.clk_bias) << ','
            << format_value(s.clk_drift) << "\n";
    }
    write_file(path, out.str());
}

std::vector<obs::EpochState> read_truth(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    expect_header(lines, path, kTruthHeader);
    std::vector<obs::EpochState> states;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty() && i + 1 == lines.size()) break;
        const int line_no = static_cast<int>(i) + 1;
        const std::vector<std::string> f = split_fields(lines[i]);
        if (f.size() != 9) {
            throw InputError(location(path, line_no) + "expected 9 fields, got " +
                             std::to_string(f.size()));
        }
        obs::EpochState s;
        s.t = parse_double(f[0], path, line_no, "t");
        s.pos = {parse_double(f[1], path, line_no, "px"),
                 parse_double(f[2], path, line_no, "py"),
                 parse_double(f[3], path, line_no, "pz")};
        s.vel = {parse_double(f[4], path, line_no, "vx"),
                 parse_double(f[5], path, line_no, "vy"),
                 parse_double(f[6], path, line_no, "vz")};
        s.clk_bias = parse_double(f[7], path, line_no, "clk_bias");
        s.clk_drift = parse_double(f[8], path, line_no, "clk_drift");
        if (!states.empty() && s.t <= states.back().t) {
            throw InputError(location(path, line_no) +
                             "epoch times must be strictly increasing");
        }
        states.push_back(s);
    }
    if (states.empty()) {
        throw InputError(path + ": no state rows");
    }
    return states;
}

void write_solution(const std::string& path, const std::vector<obs::EpochState>& states,
                    const std::string& method) {
    std::ostringstream out;
    out << kSolutionHeader << "\n";
    for (const auto& s : states) {
        out << format_value(s.t) << ',' << format_value(s.pos.x()) << ','
            << format_value(s.pos.y()) << ',' << format_value(s.pos.z()) << ','
            << format_value(s.vel.x()) << ',' << format_value(s.vel.y()) << ','
            << format_value(s.vel.z()) << ',' << format_value(s.clk_bias) << ',' << method
            << "\n";
    }
    write_file(path, out.str());
}

std::vector<obs::EpochState> read_solution(const std::string& path,
                                           std::string* method) {
    const std::vector<std::string> lines = read_lines(path);
    expect_header(lines, path, kSolutionHeader);
    std::vector<obs::EpochState> states;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty() && i + 1 == lines.size()) break;
        const int line_no = static_cast<int>(i) + 1;
        const std::vector<std::string> f = split_fields(lines[i]);
        if (f.size() != 9) {
            throw InputError(location(path, line_no) + "expected 9 fields, got " +
                             std::to_string(f.size()));
        }
        obs::EpochState s;
        s.t = parse_double(f[0], path, line_no, "t");
        s.pos = {parse_double(f[1], path, line_no, "px"),
                 parse_double(f[2], path, line_no, "py"),
                 parse_double(f[3], path, line_no, "pz")};
        s.vel = {parse_double(f[4], path, line_no, "vx"),
                 parse_double(f[5], path, line_no, "vy"),
                 parse_double(f[6], path, line_no, "vz")};
        s.clk_bias = parse_double(f[7], path, line_no, "clk_bias");
        if (f[8].empty()) {
            throw InputError(location(path, line_no) + "empty method column");
        }
        if (method != nullptr) *method = f[8];
        states.push_back(s);
    }
    if (states.empty()) {
        throw InputError(path + ": no solution rows");
    }
    return states;
}

void write_weights(const std::string& path, const std::vector<WeightRow>& rows) {
    std::ostringstream out;
    out << kWeightsHeader << "\n";
    for (const auto& r : rows) {
        out << format_value(r.t) << ',' << r.sat_id << ',' << format_value(r.weight)
            << ',' << format_value(r.residual_m) << ',' << r.round << "\n";
    }
    write_file(path, out.str());
}

std::vector<WeightRow> read_weights(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    expect_header(lines, path, kWeightsHeader);
    std::vector<WeightRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty() && i + 1 == lines.size()) break;
        const int line_no = static_cast<int>(i) + 1;
        const std::vector<std::string> f = split_fields(lines[i]);
        if (f.size() != 5) {
            throw InputError(location(path, line_no) + "expected 5 fields, got " +
                             std::to_string(f.size()));
        }
        WeightRow r;
        r.t = parse_double(f[0], path, line_no, "t");
        r.sat_id = parse_int(f[1], path, line_no, "sat_id");
        r.weight = parse_double(f[2], path, line_no, "weight");
        r.residual_m = parse_double(f[3], path, line_no, "residual_m");
        r.round = parse_int(f[4], path, line_no, "round");
        rows.push_back(r);
    }
    if (rows.empty()) {
        throw InputError(path + ": no weight rows");
    }
    return rows;
}

void write_report(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ostringstream out;
    for (const auto& [key, value] : entries) {
        out << key << '=' << value << "\n";
    }
    write_file(path, out.str());
}

std::vector<std::pair<std::string, std::string>> read_report(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto eq = lines[i].find('=');
        if (eq == std::string::npos) {
            throw InputError(location(path, static_cast<int>(i) + 1) +
                             "expected key=value");
        }
        out.emplace_back(lines[i].substr(0, eq), lines[i].substr(eq + 1));
    }
    return out;
}

}  // namespace gnssgnc::csv
