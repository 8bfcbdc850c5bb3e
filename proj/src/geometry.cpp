#include "spacecc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spacecc/errors.hpp"

namespace spacecc {

SubSatellitePoint SubSatellitePoint::from_degrees(double lat_deg, double lon_deg, double alt_km) {
    constexpr double deg = std::numbers::pi / 180.0;
    // Normalize 180 deg east to the (-pi, pi] convention.
    double lon = lon_deg;
    if (lon == -180.0) lon = 180.0;
    SubSatellitePoint p{lat_deg * deg, lon * deg, alt_km * 1000.0};
    p.validate();
    return p;
}

void SubSatellitePoint::validate() const {
    constexpr double pi = std::numbers::pi;
    if (!(latitude >= -pi / 2 - 1e-12 && latitude <= pi / 2 + 1e-12)) {
        throw InvalidConfig("latitude out of range: " + std::to_string(latitude) + " rad");
    }
    if (!(longitude > -pi - 1e-12 && longitude <= pi + 1e-12)) {
        throw InvalidConfig("longitude out of range: " + std::to_string(longitude) + " rad");
    }
    if (!(altitude > 0.0) || !std::isfinite(altitude)) {
        throw InvalidConfig("altitude must be positive, got " + std::to_string(altitude) + " m");
    }
}

double geocentric_angle(const SubSatellitePoint& a, const SubSatellitePoint& b) {
    const double c = std::sin(a.latitude) * std::sin(b.latitude) +
                     std::cos(a.latitude) * std::cos(b.latitude) * std::cos(a.longitude - b.longitude);
    // Rounding can push |c| slightly past 1 near the identity and antipodal cases.
    return std::acos(std::clamp(c, -1.0, 1.0));
}

double link_distance(const SubSatellitePoint& a, const SubSatellitePoint& b, const GeometryConstants& consts) {
    const double ra = consts.earth_radius + a.altitude;
    const double rb = consts.earth_radius + b.altitude;
    const double theta = geocentric_angle(a, b);
    const double sq = ra * ra + rb * rb - 2.0 * ra * rb * std::cos(theta);
    return std::sqrt(std::max(0.0, sq));
}

LinkGeometry path_geometry(std::span<const SubSatellitePoint> points, const GeometryConstants& consts) {
    if (points.size() < 2) {
        throw TooFewPoints("path needs at least 2 points, got " + std::to_string(points.size()));
    }
    if (!(consts.earth_radius > 0.0) || !(consts.light_speed > 0.0)) {
        throw InvalidConfig("earth radius and light speed must be positive");
    }
    LinkGeometry g;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double theta = geocentric_angle(points[i], points[i + 1]);
        const double d = link_distance(points[i], points[i + 1], consts);
        g.hop_angles.push_back(theta);
        g.hop_distances.push_back(d);
        g.total_distance += d;
        if (theta > kVisibilityAngleLimit) g.hops_beyond_visibility.push_back(i);
    }
    g.rtt_est = 2.0 * g.total_distance / consts.light_speed;
    return g;
}

double interruption_threshold(const LinkGeometry& geom) {
    if (!(geom.rtt_est > 0.0)) {
        throw DegeneratePath("estimated RTT is zero; the path has no length");
    }
    return 10.0 * geom.rtt_est;
}

}  // namespace spacecc
