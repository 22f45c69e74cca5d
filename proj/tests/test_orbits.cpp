#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "diracscar/orbits.hpp"
#include "fixtures.hpp"

namespace ob = diracscar::orbits;
namespace cm = diracscar::confmap;
using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

namespace {

const std::vector<ob::Orbit>& heart_catalog() {
    static const auto cat = ob::find_catalog(cm::BilliardShape::heart(), 5, 512);
    return cat;
}

const std::vector<ob::Orbit>& africa_catalog() {
    static const auto cat = ob::find_catalog(cm::BilliardShape::africa(), 5, 512);
    return cat;
}

const ob::Orbit* by_label(const std::vector<ob::Orbit>& cat, const std::string& label) {
    for (const auto& o : cat)
        if (o.label == label) return &o;
    return nullptr;
}

}  // namespace

TEST(FindOrbits, HeartBouncingBallOnAxis) {
    const auto two = ob::find_orbits(cm::BilliardShape::heart(), 2, 512);
    const double expect_len = 2.0 * (1.49 + 0.51) / std::sqrt(1.4802);
    auto it = std::find_if(two.begin(), two.end(), [&](const ob::Orbit& o) { return std::abs(o.length - expect_len) < 1e-8; });
    ASSERT_NE(it, two.end());
    EXPECT_NEAR(it->length, 3.28776, 1e-5);
    std::vector<double> us{it->vertices[0].position.real(), it->vertices[1].position.real()};
    std::sort(us.begin(), us.end());
    EXPECT_NEAR(us[0], -0.41919, 1e-5);
    EXPECT_NEAR(us[1], 1.22469, 1e-5);
    for (const auto& v : it->vertices) EXPECT_NEAR(v.position.imag(), 0.0, 1e-9);
    EXPECT_TRUE(it->winding_degenerate);
    EXPECT_EQ(it->winding, 0);
}

TEST(FindOrbits, HeartOddOrbitsHaveExpectedWindings) {
    const auto& cat = heart_catalog();
    bool w1_three = false, w0_five = false, w2_five = false;
    for (const auto& o : cat) {
        if (o.bounces == 3 && o.winding == 1) w1_three = true;
        if (o.bounces == 5 && o.winding == 0) w0_five = true;
        if (o.bounces == 5 && o.winding == 2) w2_five = true;
    }
    EXPECT_TRUE(w1_three);
    EXPECT_TRUE(w0_five);
    EXPECT_TRUE(w2_five);
}

TEST(FindOrbits, CatalogInvariants) {
    for (const auto* cat : {&heart_catalog(), &africa_catalog()}) {
        ASSERT_FALSE(cat->empty());
        for (const auto& o : *cat) {
            EXPECT_LE(o.specularity_residual, ob::kSpecularityTolerance) << o.label;
            EXPECT_EQ(o.maslov, o.bounces);
            EXPECT_EQ(o.orientation, ob::Orientation::CCW);
            EXPECT_GE(o.signed_area, -ob::kZeroAreaTolerance) << o.label;
            const auto p = o.polygon();
            double len = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) len += std::abs(p[(i + 1) % p.size()] - p[i]);
            EXPECT_NEAR(o.length, len, 1e-12);
            EXPECT_EQ(static_cast<int>(p.size()), o.bounces);
            EXPECT_EQ(ob::winding_number(o).winding, o.winding);
            // independent recomputation of the reflection law at every vertex
            for (std::size_t i = 0; i < p.size(); ++i) {
                const cplx din = p[i] - p[(i + p.size() - 1) % p.size()];
                const cplx dout = p[(i + 1) % p.size()] - p[i];
                const cplx n = std::polar(1.0, o.vertices[i].normal_angle);
                const double in_angle = std::arg(din / n);
                const double out_angle = std::arg(dout / -n);
                EXPECT_NEAR(in_angle, -out_angle, 1e-8) << o.label;
            }
        }
    }
}

TEST(FindOrbits, LabelsFollowLength) {
    const auto& cat = heart_catalog();
    for (std::size_t i = 1; i < cat.size(); ++i) {
        if (cat[i].bounces == cat[i - 1].bounces) {
            EXPECT_GE(cat[i].length, cat[i - 1].length);
        } else {
            EXPECT_GT(cat[i].bounces, cat[i - 1].bounces);
        }
    }
    EXPECT_EQ(ob::detail::roman(4), "IV");
    EXPECT_EQ(ob::detail::roman(19), "XIX");
}

TEST(FindOrbits, FixtureClassesPresent) {
    for (const auto& [cat, classes] : {std::pair{&heart_catalog(), &fixtures::heart_classes()},
                                       std::pair{&africa_catalog(), &fixtures::africa_classes()}}) {
        for (const auto& c : *classes) {
            const auto* o = by_label(*cat, c.label);
            ASSERT_NE(o, nullptr) << c.label;
            EXPECT_NEAR(o->length, c.length, 1e-3) << c.label;
            EXPECT_EQ(std::abs(o->winding), c.winding) << c.label;
            EXPECT_EQ(o->bounces % 2 == 1, c.odd) << c.label;
        }
    }
}

TEST(Orbit, ReversalFlipsOrientationAndWinding) {
    for (const auto& o : heart_catalog()) {
        const auto r = ob::reversed(o);
        EXPECT_EQ(r.orientation, ob::Orientation::CW);
        EXPECT_EQ(r.winding, -o.winding);
        EXPECT_EQ(ob::winding_number(r).winding, -o.winding);
        EXPECT_NEAR(ob::detail::shoelace(r.polygon()), -o.signed_area, 1e-12);
        EXPECT_NEAR(ob::specularity_residual(r.vertices), o.specularity_residual, 1e-9);
    }
}

TEST(Orbit, CanonicalFormIgnoresCyclicRelabelling) {
    for (const auto& o : heart_catalog()) {
        for (std::size_t shift = 1; shift < o.vertices.size(); ++shift) {
            auto rot = o;
            std::rotate(rot.vertices.begin(), rot.vertices.begin() + static_cast<long>(shift), rot.vertices.end());
            const auto c = ob::canonical(rot);
            ASSERT_EQ(c.vertices.size(), o.vertices.size());
            for (std::size_t i = 0; i < c.vertices.size(); ++i)
                EXPECT_NEAR(std::abs(c.vertices[i].position - o.vertices[i].position), 0.0, 1e-14);
            // the reversed traversal canonicalises back as well
            const auto cr = ob::canonical(ob::reversed(rot));
            for (std::size_t i = 0; i < cr.vertices.size(); ++i)
                EXPECT_NEAR(std::abs(cr.vertices[i].position - o.vertices[i].position), 0.0, 1e-14);
        }
    }
}

TEST(Orbit, HeartMirrorImagesAreFound) {
    const auto& cat = heart_catalog();
    for (const auto& o : cat) {
        bool found = false;
        for (const auto& m : cat) {
            if (m.bounces != o.bounces || std::abs(m.length - o.length) > 1e-7) continue;
            bool all = true;
            for (const auto& v : o.vertices) {
                bool hit = false;
                for (const auto& w : m.vertices) hit = hit || std::abs(std::conj(v.position) - w.position) < 1e-6;
                all = all && hit;
            }
            found = found || all;
        }
        EXPECT_TRUE(found) << o.label;
    }
}

TEST(Winding, SimplePolygons) {
    const std::vector<cplx> tri{{1, 0}, {-0.5, 0.8}, {-0.5, -0.8}};
    EXPECT_EQ(ob::winding_number(tri).winding, 1);
    EXPECT_EQ(ob::winding_number(std::vector<cplx>{tri[0], tri[2], tri[1]}).winding, -1);
    const std::vector<cplx> off{{1, 1}, {2, 1}, {1.5, 2}};
    EXPECT_EQ(ob::winding_number(off).winding, 0);
    // pentagram around the origin winds twice
    std::vector<cplx> star;
    for (int i = 0; i < 5; ++i) star.push_back(std::polar(1.0, 2 * kPi * (2 * i) / 5));
    EXPECT_EQ(ob::winding_number(star).winding, 2);
    const auto degen = ob::winding_number(std::vector<cplx>{{1, 0}, {-1, 0}});
    EXPECT_TRUE(degen.degenerate);
    EXPECT_EQ(degen.winding, 0);
}

TEST(Tube, IndicatorAndMonteCarloArea) {
    const auto* tri = by_label(heart_catalog(), "period-3-II");
    ASSERT_NE(tri, nullptr);
    const double w = 0.03;
    const auto tube = ob::orbit_tube(*tri, w);
    const auto p = tri->polygon();
    EXPECT_EQ(tube(0.5 * (p[0] + p[1])), 1);
    // the centroid of this triangle is far from all chords
    const cplx centroid = (p[0] + p[1] + p[2]) / 3.0;
    ASSERT_GT(tube.distance(centroid), 2 * w);
    EXPECT_EQ(tube(centroid), 0);
    // a point 2w off a chord midpoint, on the outer side
    const cplx mid = 0.5 * (p[0] + p[1]);
    const cplx nrm = (p[1] - p[0]) / std::abs(p[1] - p[0]) * cplx(0, -1);
    EXPECT_EQ(tube(mid + 2.0 * w * nrm), 0);
    EXPECT_THROW(ob::orbit_tube(*tri, 0.0), diracscar::DomainError);

    // Closed form for the width-w neighbourhood of a convex polygon's edges:
    // 2 P w + pi w^2 - w^2 sum cot(theta_i / 2), theta_i interior angles.
    double cot_sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const cplx a = p[(i + 2) % 3] - p[i], b = p[(i + 1) % 3] - p[i];
        const double theta = std::abs(std::arg(b / a));
        cot_sum += 1.0 / std::tan(theta / 2);
    }
    const double expect = 2 * tri->length * w + kPi * w * w - w * w * cot_sum;
    double umin = 1e9, umax = -1e9, vmin = 1e9, vmax = -1e9;
    for (const auto& q : p) {
        umin = std::min(umin, q.real()); umax = std::max(umax, q.real());
        vmin = std::min(vmin, q.imag()); vmax = std::max(vmax, q.imag());
    }
    umin -= w; umax += w; vmin -= w; vmax += w;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(umin, umax), V(vmin, vmax);
    const int n = 400000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += tube(cplx(U(rng), V(rng)));
    const double box = (umax - umin) * (vmax - vmin);
    const double frac = static_cast<double>(hits) / n;
    const double mc = frac * box;
    const double se = box * std::sqrt(frac * (1 - frac) / n);
    EXPECT_NEAR(mc, expect, 4 * se);
}

TEST(Catalog, JsonRoundTripAndCsv) {
    const auto& cat = heart_catalog();
    const auto j = ob::catalog_json(cat);
    ASSERT_EQ(j.size(), cat.size());
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const auto back = ob::orbit_from_json(j[i]);
        EXPECT_EQ(back.label, cat[i].label);
        EXPECT_DOUBLE_EQ(back.length, cat[i].length);
        EXPECT_EQ(back.winding, cat[i].winding);
        EXPECT_EQ(back.bounces, cat[i].bounces);
        EXPECT_EQ(j[i].at("sigma").get<int>(), cat[i].bounces);
    }
    std::ostringstream os;
    ob::write_polylines_csv(os, cat);
    std::size_t rows = 0;
    for (const auto& o : cat) rows += o.vertices.size() + 1;
    const auto s = os.str();
    EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), rows + 1);
}

TEST(FindOrbits, RejectsSingleBounce) {
    EXPECT_THROW(ob::find_orbits(cm::BilliardShape::heart(), 1, 16), diracscar::DomainError);
}

TEST(Geometric, CurvatureFilterDropsDentOrbits) {
    const auto h = cm::BilliardShape::heart();
    const auto& cat = heart_catalog();
    const auto geo = ob::geometric_orbits(h, cat, 0.1);
    EXPECT_LT(geo.size(), cat.size());
    for (const auto& o : geo) EXPECT_GE(ob::min_curvature_radius(h, o), 0.1);
    for (const auto& c : fixtures::heart_classes()) {
        EXPECT_TRUE(std::any_of(geo.begin(), geo.end(), [&](const ob::Orbit& o) { return o.label == c.label; })) << c.label;
    }
}
