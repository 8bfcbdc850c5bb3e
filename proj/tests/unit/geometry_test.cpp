#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "spacecc/errors.hpp"
#include "spacecc/geometry.hpp"
#include "spacecc/sim_core.hpp"

using namespace spacecc;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGeoAlt = 35'786'000.0;
constexpr double kR = 6'371'000.0;

SubSatellitePoint pt(double lat, double lon, double alt = kGeoAlt) { return {lat, lon, alt}; }

SubSatellitePoint random_point(RngStream& r) {
    return pt(r.next_uniform() * kPi - kPi / 2, r.next_uniform() * 2 * kPi - kPi, 1.0 + r.next_uniform() * 4e7);
}

}  // namespace

TEST(Geometry, IdentityAngleIsZero) {
    const auto a = pt(0.3, -1.2);
    EXPECT_DOUBLE_EQ(geocentric_angle(a, a), 0.0);
    EXPECT_DOUBLE_EQ(link_distance(a, a), 0.0);
}

TEST(Geometry, QuarterTurnOnEquator) {
    EXPECT_NEAR(geocentric_angle(pt(0, 0), pt(0, kPi / 2)), kPi / 2, 1e-15);
}

TEST(Geometry, MixedHemispherePairMatchesHighPrecisionValue) {
    // cos(theta) = sin(pi/4) sin(-pi/4) + cos^2(pi/4) cos(pi/3) = -1/4
    EXPECT_NEAR(geocentric_angle(pt(kPi / 4, 0), pt(-kPi / 4, kPi / 3)), 1.8234765819369751, 1e-14);
}

TEST(Geometry, GeoPairAtQuarterTurn) {
    const double d = link_distance(pt(0, 0), pt(0, kPi / 2));
    EXPECT_NEAR(d, std::sqrt(2.0) * 42'157'000.0, 1e-6);
    EXPECT_NEAR(d / 1000.0, 59'619.0, 1.0);
}

TEST(Geometry, DiametricPairIsTwiceTheOrbitRadius) {
    EXPECT_NEAR(link_distance(pt(0, 0, 1e6), pt(0, kPi, 1e6)), 2 * (kR + 1e6), 1e-6);
}

TEST(Geometry, FromDegreesValidatesRanges) {
    const auto p = SubSatellitePoint::from_degrees(45.0, 90.0, 35786.0);
    EXPECT_NEAR(p.latitude, kPi / 4, 1e-15);
    EXPECT_NEAR(p.longitude, kPi / 2, 1e-15);
    EXPECT_DOUBLE_EQ(p.altitude, kGeoAlt);
    EXPECT_THROW(SubSatellitePoint::from_degrees(91.0, 0.0, 100.0), InvalidConfig);
    EXPECT_THROW(SubSatellitePoint::from_degrees(0.0, 0.0, 0.0), InvalidConfig);
}

TEST(Geometry, PathNeedsTwoPoints) {
    std::vector<SubSatellitePoint> one{pt(0, 0)};
    EXPECT_THROW(path_geometry(one), TooFewPoints);
}

TEST(Geometry, IdenticalPointsGiveZeroPath) {
    std::vector<SubSatellitePoint> pts{pt(0.1, 0.2), pt(0.1, 0.2)};
    const auto g = path_geometry(pts);
    EXPECT_DOUBLE_EQ(g.total_distance, 0.0);
    EXPECT_DOUBLE_EQ(g.rtt_est, 0.0);
    EXPECT_THROW(interruption_threshold(g), DegeneratePath);
}

TEST(Geometry, SeventyTwoThousandKilometrePathRtt) {
    // Equatorial GEO chord of exactly 72 000 km.
    const double theta = 2.0 * std::asin(72'000'000.0 / (2.0 * (kR + kGeoAlt)));
    std::vector<SubSatellitePoint> pts{pt(0, 0), pt(0, theta)};
    const auto g = path_geometry(pts);
    EXPECT_NEAR(g.total_distance, 7.2e7, 1e-4);
    EXPECT_NEAR(g.rtt_est, 0.4803, 5e-5);
    EXPECT_NEAR(interruption_threshold(g), 4.803, 5e-4);
}

TEST(Geometry, ThreePointChainSumsHops) {
    std::vector<SubSatellitePoint> pts{pt(0.2, -0.5), pt(0, 0.3), pt(-0.1, 1.9)};
    const auto g = path_geometry(pts);
    ASSERT_EQ(g.hop_distances.size(), 2u);
    EXPECT_EQ(g.total_distance, link_distance(pts[0], pts[1]) + link_distance(pts[1], pts[2]));
    EXPECT_DOUBLE_EQ(g.rtt_est, 2.0 * g.total_distance / 299'792'458.0);
}

TEST(Geometry, FlagsHopsBeyondVisibility) {
    std::vector<SubSatellitePoint> pts{pt(0, 0), pt(0, 0.5), pt(0, 0.5 + 2.5)};
    const auto g = path_geometry(pts);
    EXPECT_EQ(g.hops_beyond_visibility, (std::vector<std::size_t>{1}));
}

TEST(Geometry, InterruptionThresholdScales) {
    LinkGeometry g;
    g.rtt_est = 0.48;
    EXPECT_DOUBLE_EQ(interruption_threshold(g), 4.8);
    g.rtt_est = 0.05;
    EXPECT_DOUBLE_EQ(interruption_threshold(g), 0.5);
}

TEST(PropertyGeometry, SymmetryAndTriangleBounds) {
    RngStream r(11, "geometry");
    for (int i = 0; i < 5000; ++i) {
        const auto a = random_point(r);
        const auto b = random_point(r);
        const double th = geocentric_angle(a, b);
        ASSERT_EQ(th, geocentric_angle(b, a));
        ASSERT_GE(th, 0.0);
        ASSERT_LE(th, kPi);
        const double d = link_distance(a, b);
        ASSERT_EQ(d, link_distance(b, a));
        const double tol = 1e-6 * (2 * kR + a.altitude + b.altitude);
        ASSERT_GE(d + tol, std::abs(a.altitude - b.altitude));
        ASSERT_LE(d, (kR + a.altitude) + (kR + b.altitude) + tol);
    }
}

TEST(PropertyGeometry, DistanceMonotoneInAngleAtFixedAltitude) {
    RngStream r(12, "monotone");
    for (int i = 0; i < 1000; ++i) {
        const double h = 1.0 + r.next_uniform() * 4e7;
        const double lat = r.next_uniform() * kPi - kPi / 2;
        const auto a = pt(lat, 0.0, h);
        double prev_theta = -1.0, prev_d = -1.0;
        for (int k = 0; k <= 64; ++k) {
            const auto b = pt(lat - kPi / 2 * k / 64.0 * (lat > 0 ? 1 : -1), 0.0, h);
            const double th = geocentric_angle(a, b);
            const double d = link_distance(a, b);
            if (th >= prev_theta) ASSERT_GE(d + 1e-6, prev_d);
            prev_theta = th;
            prev_d = d;
        }
    }
}

TEST(PropertyGeometry, PathTotalIsExactHopSum) {
    RngStream r(13, "paths");
    for (int i = 0; i < 1000; ++i) {
        std::vector<SubSatellitePoint> pts;
        const int n = 2 + static_cast<int>(r.next_uniform() * 5);
        for (int k = 0; k < n; ++k) pts.push_back(random_point(r));
        const auto g = path_geometry(pts);
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) sum += link_distance(pts[k], pts[k + 1]);
        ASSERT_EQ(g.total_distance, sum);
        ASSERT_EQ(g.hop_angles.size(), pts.size() - 1);
    }
}
