#include "gnssgnc/geo.h"

#include <cmath>
#include <stdexcept>

namespace gnssgnc::geo {

namespace {
constexpr double kPi = 3.14159265358979323846;
// first eccentricity squared, e^2 = f * (2 - f)
constexpr double kE2 = Constants::kWgs84F * (2.0 - Constants::kWgs84F);
// semi-minor axis
const double kWgs84B = Constants::kWgs84A * std::sqrt(1.0 - kE2);
}  // namespace

double EnuVector::norm() const {
    return std::sqrt(east * east + north * north + up * up);
}

double EnuVector::horizontal_norm() const {
    return std::sqrt(east * east + north * north);
}

EcefPoint geodetic_to_ecef(double lat, double lon, double height) {
    if (std::abs(lat) > kPi / 2.0 + 1e-12) {
        throw std::invalid_argument("geodetic_to_ecef: latitude out of [-pi/2, pi/2]");
    }
    const double sl = std::sin(lat);
    const double cl = std::cos(lat);
    const double n = Constants::kWgs84A / std::sqrt(1.0 - kE2 * sl * sl);
    return {(n + height) * cl * std::cos(lon),
            (n + height) * cl * std::sin(lon),
            (n * (1.0 - kE2) + height) * sl};
}

EcefPoint geodetic_to_ecef(const GeodeticPoint& p) {
    return geodetic_to_ecef(p.lat, p.lon, p.height);
}

GeodeticPoint ecef_to_geodetic(const EcefPoint& p) {
    const double rho = std::hypot(p.x(), p.y());
    if (rho == 0.0 && p.z() == 0.0) {
        throw std::invalid_argument("ecef_to_geodetic: origin has no geodetic image");
    }
    GeodeticPoint out;
    out.lon = std::atan2(p.y(), p.x());

    if (rho < 1e-9) {  // polar axis
        out.lat = (p.z() >= 0.0) ? kPi / 2.0 : -kPi / 2.0;
        out.height = std::abs(p.z()) - kWgs84B;
        return out;
    }

    double lat = std::atan2(p.z(), rho * (1.0 - kE2));
    double n = Constants::kWgs84A;
    for (int i = 0; i < 10; ++i) {
        const double sl = std::sin(lat);
        n = Constants::kWgs84A / std::sqrt(1.0 - kE2 * sl * sl);
        const double h = rho / std::cos(lat) - n;
        const double next = std::atan2(p.z(), rho * (1.0 - kE2 * n / (n + h)));
        const double delta = std::abs(next - lat);
        lat = next;
        if (delta < 1e-12) break;
    }
    out.lat = lat;
    const double sl = std::sin(lat);
    n = Constants::kWgs84A / std::sqrt(1.0 - kE2 * sl * sl);
    // near the poles cos(lat) is ill-conditioned; recover height from z there
    if (std::abs(lat) < kPi / 4.0) {
        out.height = rho / std::cos(lat) - n;
    } else {
        out.height = p.z() / sl - n * (1.0 - kE2);
    }
    return out;
}

namespace {
// rows: east, north, up unit vectors of the tangent frame at (lat, lon)
Eigen::Matrix3d enu_rotation(double lat, double lon) {
    const double sl = std::sin(lat), cl = std::cos(lat);
    const double so = std::sin(lon), co = std::cos(lon);
    Eigen::Matrix3d r;
    r << -so, co, 0.0,
         -sl * co, -sl * so, cl,
         cl * co, cl * so, sl;
    return r;
}
}  // namespace

EnuVector ecef_to_enu(const EcefPoint& p, const EcefPoint& ref) {
    if (ref.norm() == 0.0) {
        throw std::invalid_argument("ecef_to_enu: reference point at origin");
    }
    const GeodeticPoint g = ecef_to_geodetic(ref);
    const Eigen::Vector3d d = enu_rotation(g.lat, g.lon) * (p - ref);
    return {d.x(), d.y(), d.z()};
}

Eigen::Matrix3d enu_basis(const EcefPoint& ref) {
    if (ref.norm() == 0.0) {
        throw std::invalid_argument("enu_basis: reference point at origin");
    }
    const GeodeticPoint g = ecef_to_geodetic(ref);
    return enu_rotation(g.lat, g.lon).transpose();
}

ElevationAzimuth elevation_azimuth(const EcefPoint& sat, const EcefPoint& rcv) {
    if ((sat - rcv).norm() == 0.0) {
        throw std::invalid_argument("elevation_azimuth: coincident points");
    }
    const EnuVector enu = ecef_to_enu(sat, rcv);
    ElevationAzimuth out;
    out.elevation = std::atan2(enu.up, enu.horizontal_norm());
    out.azimuth = std::atan2(enu.east, enu.north);
    if (out.azimuth < 0.0) out.azimuth += 2.0 * kPi;
    return out;
}

Eigen::Vector3d los_unit_vector(const EcefPoint& sat, const EcefPoint& rcv) {
    const Eigen::Vector3d d = sat - rcv;
    const double n = d.norm();
    if (n == 0.0) {
        throw std::invalid_argument("los_unit_vector: coincident points");
    }
    return d / n;
}

}  // namespace gnssgnc::geo
