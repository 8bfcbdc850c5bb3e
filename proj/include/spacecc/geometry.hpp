#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spacecc {

/// Point on the ground track of a satellite plus its orbital altitude.
/// Angles in radians, altitude in meters.
struct SubSatellitePoint {
    double latitude = 0.0;   // [-pi/2, pi/2]
    double longitude = 0.0;  // (-pi, pi]
    double altitude = 1.0;   // > 0

    /// Config-layer constructor: degrees and kilometers. Validates ranges.
    static SubSatellitePoint from_degrees(double lat_deg, double lon_deg, double alt_km);
    void validate() const;
};

struct GeometryConstants {
    double earth_radius = 6'371'000.0;   // m
    double light_speed = 299'792'458.0;  // m/s
};

struct LinkGeometry {
    std::vector<double> hop_angles;     // rad, one per hop
    std::vector<double> hop_distances;  // m, one per hop
    double total_distance = 0.0;        // m
    double rtt_est = 0.0;               // s, 2D/c
    /// Hops whose geocentric angle exceeds 2*pi/3, the visibility bound the
    /// maintenance threshold is tuned for. Informational only.
    std::vector<std::size_t> hops_beyond_visibility;
};

inline constexpr double kVisibilityAngleLimit = 2.0943951023931953;  // 2*pi/3

double geocentric_angle(const SubSatellitePoint& a, const SubSatellitePoint& b);
double link_distance(const SubSatellitePoint& a, const SubSatellitePoint& b,
                     const GeometryConstants& consts = {});
/// Throws TooFewPoints for fewer than two points.
LinkGeometry path_geometry(std::span<const SubSatellitePoint> points,
                           const GeometryConstants& consts = {});
/// 10 * rtt_est. Throws DegeneratePath when rtt_est is zero.
double interruption_threshold(const LinkGeometry& geom);

}  // namespace spacecc
