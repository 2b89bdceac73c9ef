/*
 * gnssgnc — coordinate frames, physical constants and satellite-receiver
 * geometry shared by every measurement model.
 */
#ifndef GNSSGNC_GEO_H
#define GNSSGNC_GEO_H

#include <Eigen/Core>

namespace gnssgnc::geo {

using EcefPoint = Eigen::Vector3d;     // meters, earth-centered earth-fixed
using EcefVelocity = Eigen::Vector3d;  // m/s, ECEF

/* Physical constants. WGS-84 ellipsoid is fixed; no other datum is supported. */
struct Constants {
    static constexpr double kSpeedOfLight = 299792458.0;       // m/s
    static constexpr double kEarthRotationRate = 7.2921151467e-5;  // rad/s
    static constexpr double kWgs84A = 6378137.0;               // semi-major axis, m
    static constexpr double kWgs84F = 1.0 / 298.257223563;     // flattening
};

/* Local tangent-frame vector relative to a geodetic reference point. */
struct EnuVector {
    double east = 0.0;   // m
    double north = 0.0;  // m
    double up = 0.0;     // m

    double norm() const;
    double horizontal_norm() const;
};

struct GeodeticPoint {
    double lat = 0.0;     // rad
    double lon = 0.0;     // rad
    double height = 0.0;  // m above the ellipsoid
};

/* WGS-84 geodetic -> ECEF. Throws std::invalid_argument for |lat| > pi/2. */
EcefPoint geodetic_to_ecef(double lat, double lon, double height);
EcefPoint geodetic_to_ecef(const GeodeticPoint& p);

/* ECEF -> geodetic by iterative latitude solve (tolerance 1e-12 rad,
 * at most 10 iterations). Throws std::invalid_argument at the origin. */
GeodeticPoint ecef_to_geodetic(const EcefPoint& p);

/* Rotation of (p - ref) into the east/north/up frame at ref. */
EnuVector ecef_to_enu(const EcefPoint& p, const EcefPoint& ref);

/* Columns are the east/north/up unit vectors at ref, so
 * ecef = ref + enu_basis(ref) * enu. */
Eigen::Matrix3d enu_basis(const EcefPoint& ref);

/* Elevation in [-pi/2, pi/2] and azimuth in [0, 2*pi), clockwise from north. */
struct ElevationAzimuth {
    double elevation = 0.0;  // rad
    double azimuth = 0.0;    // rad
};
ElevationAzimuth elevation_azimuth(const EcefPoint& sat, const EcefPoint& rcv);

/* (sat - rcv) / ||sat - rcv||. Throws std::invalid_argument when coincident. */
Eigen::Vector3d los_unit_vector(const EcefPoint& sat, const EcefPoint& rcv);

}  // namespace gnssgnc::geo

#endif
