#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "diracscar/confmap.hpp"
#include "diracscar/quadrature.hpp"

namespace cm = diracscar::confmap;
using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

TEST(BilliardShape, PresetsAndNormalisation) {
    const auto heart = cm::BilliardShape::heart();
    EXPECT_DOUBLE_EQ(heart.norm(), std::sqrt(1.0 + 2.0 * 0.49 * 0.49));
    const auto africa = cm::BilliardShape::africa();
    EXPECT_DOUBLE_EQ(africa.norm(), std::sqrt(1.0 + 2.0 * 0.04 + 3.0 * 0.04));
    EXPECT_TRUE(cm::BilliardShape::preset("heart").has_value());
    EXPECT_TRUE(cm::BilliardShape::preset("africa").has_value());
    EXPECT_TRUE(cm::BilliardShape::preset("disk").has_value());
    EXPECT_FALSE(cm::BilliardShape::preset("moon").has_value());
    EXPECT_TRUE(heart.mirror_symmetric());
    EXPECT_FALSE(africa.mirror_symmetric());
}

TEST(BilliardShape, RejectsNonUnivalentParameters) {
    // w'(z) = 1 + 2bz vanishes inside the disk for b > 1/2
    EXPECT_THROW(cm::BilliardShape(0.6, 0.0, 0.0), diracscar::ConfigError);
    EXPECT_THROW(cm::BilliardShape(0.8, 0.0, 0.0), diracscar::ConfigError);
    EXPECT_THROW(cm::BilliardShape(std::nan(""), 0.0, 0.0), diracscar::ConfigError);
}

TEST(Map, ClosedFormValues) {
    const auto heart = cm::BilliardShape::heart();
    EXPECT_NEAR(cm::map(heart, 1.0).real(), 1.49 / std::sqrt(1.4802), 1e-15);
    EXPECT_NEAR(cm::map(heart, 1.0).real(), 1.22469, 1e-5);
    EXPECT_NEAR(cm::map(heart, -1.0).real(), -0.51 / std::sqrt(1.4802), 1e-15);
    EXPECT_EQ(cm::map(heart, 0.0), cplx(0.0, 0.0));
    const auto africa = cm::BilliardShape::africa();
    const cplx expect = (1.0 + 0.2 + 0.2 * std::polar(1.0, kPi / 3)) / std::sqrt(1.2);
    EXPECT_NEAR(std::abs(cm::map(africa, 1.0) - expect), 0.0, 1e-15);
    EXPECT_EQ(cm::map(africa, 0.0), cplx(0.0, 0.0));
}

TEST(Map, HeartMirrorSymmetry) {
    const auto heart = cm::BilliardShape::heart();
    for (int i = 0; i < 200; ++i) {
        const cplx z = std::polar(0.005 * i, 0.37 * i);
        EXPECT_NEAR(std::abs(cm::map(heart, std::conj(z)) - std::conj(cm::map(heart, z))), 0.0, 1e-15);
    }
}

TEST(Jacobian, OriginAndAngularAverage) {
    for (const auto& s : {cm::BilliardShape::heart(), cm::BilliardShape::africa()}) {
        EXPECT_NEAR(cm::jacobian_sq(s, 0.0), 1.0 / (s.norm() * s.norm()), 1e-15);
        for (double r : {0.2, 0.6, 1.0}) {
            const int n = 512;
            double avg = 0.0;
            for (int j = 0; j < n; ++j) avg += cm::jacobian_sq(s, std::polar(r, 2 * kPi * j / n));
            avg /= n;
            const double b = s.b(), c = s.c();
            const double expect = (1 + 4 * b * b * r * r + 9 * c * c * r * r * r * r) / (s.norm() * s.norm());
            EXPECT_NEAR(avg, expect, 1e-13);
        }
    }
}

TEST(Jacobian, PositiveOnClosedDisk) {
    for (const auto& s : {cm::BilliardShape::heart(), cm::BilliardShape::africa()}) {
        for (int i = 0; i <= 40; ++i) {
            for (int j = 0; j < 256; ++j) {
                EXPECT_GT(cm::jacobian_sq(s, std::polar(i / 40.0, 2 * kPi * j / 256)), 0.0);
            }
        }
    }
}

TEST(Area, ConformalAreaMatchesShoelace) {
    for (const auto& s : {cm::BilliardShape::heart(), cm::BilliardShape::africa()}) {
        // shoelace on a fine boundary polygon
        const int n = 20000;
        double shoelace = 0.0;
        for (int j = 0; j < n; ++j) {
            const cplx a = cm::map(s, std::polar(1.0, 2 * kPi * j / n));
            const cplx b = cm::map(s, std::polar(1.0, 2 * kPi * (j + 1) / n));
            shoelace += a.real() * b.imag() - b.real() * a.imag();
        }
        shoelace *= 0.5;
        // area integral of |w'|^2 over the disk with a polar midpoint/Gauss product rule
        const auto g = diracscar::quadrature::gauss_legendre(40, 0.0, 1.0);
        double integral = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const int m = 256;
            double ring = 0.0;
            for (int j = 0; j < m; ++j) ring += cm::jacobian_sq(s, std::polar(g.nodes[i], 2 * kPi * j / m));
            integral += g.weights[i] * g.nodes[i] * ring * 2 * kPi / m;
        }
        EXPECT_NEAR(cm::area(s), integral, 1e-12);
        EXPECT_NEAR(cm::area(s), shoelace, 1e-6);
    }
}

TEST(Boundary, HeartSymmetryPoints) {
    const auto heart = cm::BilliardShape::heart();
    const auto pts = cm::boundary(heart, 1024);
    ASSERT_EQ(pts.size(), 1024u);
    EXPECT_NEAR(pts[0].position.real(), 1.22469, 1e-5);
    EXPECT_NEAR(pts[0].position.imag(), 0.0, 1e-15);
    EXPECT_NEAR(pts[0].normal_angle, 0.0, 1e-14);
    EXPECT_NEAR(pts[0].s, 0.0, 1e-12);
    EXPECT_NEAR(pts[512].position.real(), -0.51 / std::sqrt(1.4802), 1e-14);
    EXPECT_NEAR(pts[512].position.real(), -0.41919, 1e-5);
    EXPECT_NEAR(pts[512].normal_angle, kPi, 1e-12);
}

TEST(Boundary, ArcLengthAndNormalWinding) {
    for (const auto& s : {cm::BilliardShape::heart(), cm::BilliardShape::africa()}) {
        const auto pts = cm::boundary(s, 4096);
        const double perim = cm::perimeter(s);
        // panelled Gauss is the less accurate of the two near the heart's dent
        EXPECT_NEAR(perim, cm::arc_length(s, 0.0, 2 * kPi), 1e-8);
        // normal angle is continuous and winds once
        for (std::size_t j = 1; j < pts.size(); ++j) {
            EXPECT_LT(std::abs(pts[j].normal_angle - pts[j - 1].normal_angle), 0.1);
        }
        const double last_step = cm::normal_angle_at(s, 0.0) + 2 * kPi - pts.back().normal_angle;
        EXPECT_NEAR(pts.back().normal_angle - pts.front().normal_angle + last_step, 2 * kPi, 1e-9);
        // every point lies on the image of the unit circle
        for (const auto& p : pts) {
            EXPECT_NEAR(std::abs(p.position - cm::map(s, std::polar(1.0, p.phi))), 0.0, 1e-10);
            EXPECT_GE(p.s, 0.0);
            EXPECT_LT(p.s, perim + 1e-9);
        }
        // the point with s = 0 sits on the positive u axis
        const auto origin = cm::boundary_point(s, cm::positive_u_crossing(s));
        EXPECT_NEAR(origin.position.imag(), 0.0, 1e-12);
        EXPECT_GT(origin.position.real(), 0.0);
        EXPECT_NEAR(origin.s, 0.0, 1e-12);
    }
}

TEST(Boundary, NormalIsPerpendicularToTangent) {
    const auto s = cm::BilliardShape::africa();
    for (int j = 0; j < 360; ++j) {
        const double phi = 2 * kPi * j / 360;
        const cplx z = std::polar(1.0, phi);
        const cplx tangent = cplx(0, 1) * z * cm::derivative(s, z);
        const cplx normal = std::polar(1.0, cm::normal_angle_at(s, phi));
        EXPECT_NEAR((std::conj(tangent) * normal).real(), 0.0, 1e-13);
        // outward: moving along the normal leaves the image of the disk
        const cplx outside = cm::map(s, z) + 1e-3 * normal;
        EXPECT_FALSE(cm::inverse_map(s, outside, 0.99 * z).has_value());
    }
}

TEST(Boundary, InverseMapRoundTrip) {
    const auto s = cm::BilliardShape::heart();
    for (int i = 1; i < 10; ++i) {
        const cplx z = std::polar(0.1 * i, 0.7 * i);
        const auto back = cm::inverse_map(s, cm::map(s, z), 0.9 * z);
        ASSERT_TRUE(back.has_value());
        EXPECT_NEAR(std::abs(*back - z), 0.0, 1e-12);
    }
}

TEST(Boundary, CurvatureOfDiskAndCsv) {
    const auto d = cm::BilliardShape::disk();
    for (double phi : {0.0, 1.0, 4.0}) EXPECT_NEAR(cm::curvature_radius(d, phi), 1.0, 1e-15);
    EXPECT_THROW(cm::boundary(d, 10), diracscar::DomainError);
    std::ostringstream os;
    cm::write_boundary_csv(os, cm::boundary(d, 64));
    const std::string out = os.str();
    EXPECT_EQ(out.rfind("s,u,v,normal_angle\n", 0), 0u);
    EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 65);
}
