#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "diracscar/diskbasis.hpp"

namespace db = diracscar::diskbasis;
namespace sf = diracscar::specfun;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

const db::BasisMode& mode_at(const db::Basis& b, int l, int m) {
    for (const auto& md : b.modes) {
        if (md.index.l == l && md.index.m == m) return md;
    }
    throw std::out_of_range("mode not in basis");
}

// Overlap 2*pi int_0^1 (phi_a phi_b + chi_a chi_b) r dr by tanh-sinh quadrature, which
// copes with the r^(2nu+1) endpoint behaviour of fractional orders independently of the
// library's substituted Gauss rule.
double overlap(const db::BasisMode& a, const db::BasisMode& b) {
    boost::math::quadrature::tanh_sinh<double> ts;
    const double acc = ts.integrate(
        [&](double r) {
            const auto va = db::radial_values(a.nu, a.regime, a.mu * r);
            const auto vb = db::radial_values(b.nu, b.regime, b.mu * r);
            return r * (va.phi * vb.phi + va.chi * vb.chi);
        },
        0.0, 1.0, 1e-14);
    return 2.0 * std::numbers::pi * a.norm * b.norm * acc;
}

}  // namespace

TEST(FluxParameter, ReducesModuloOne) {
    EXPECT_DOUBLE_EQ(db::FluxParameter(1.25).value(), 0.25);
    EXPECT_DOUBLE_EQ(db::FluxParameter(-0.25).value(), 0.75);
    EXPECT_DOUBLE_EQ(db::FluxParameter(3.0).value(), 0.0);
    EXPECT_DOUBLE_EQ(db::FluxParameter::unreduced(1.25).value(), 1.25);
    EXPECT_THROW(db::FluxParameter(std::nan("")), diracscar::DomainError);
}

TEST(Regime, ClassificationIsExhaustiveAndExclusive) {
    using R = db::Regime;
    EXPECT_EQ(db::classify(0.0), R::IntegerNu);
    EXPECT_EQ(db::classify(-3.0), R::IntegerNu);
    EXPECT_EQ(db::classify(2.0 + 1e-12), R::IntegerNu);
    EXPECT_EQ(db::classify(0.75), R::PositiveNu);
    EXPECT_EQ(db::classify(-2.3), R::BelowMinusOne);
    EXPECT_EQ(db::classify(-0.25), R::MinusHalfToZero);
    EXPECT_EQ(db::classify(-0.75), R::MinusOneToMinusHalf);
    EXPECT_EQ(db::classify(-0.5), R::ExactlyMinusHalf);
    // every sample lands in exactly one class, and the class agrees with its defining interval
    for (int i = -4000; i <= 4000; ++i) {
        const double nu = i * 0.00137;
        const R r = db::classify(nu);
        const bool integer = std::abs(nu - std::round(nu)) < 1e-9;
        const bool half = std::abs(nu + 0.5) < 1e-9;
        switch (r) {
            case R::IntegerNu: EXPECT_TRUE(integer); break;
            case R::ExactlyMinusHalf: EXPECT_TRUE(half); break;
            case R::PositiveNu: EXPECT_TRUE(nu > 0 && !integer); break;
            case R::BelowMinusOne: EXPECT_TRUE(nu < -1 && !integer); break;
            case R::MinusHalfToZero: EXPECT_TRUE(nu > -0.5 && nu < 0 && !integer); break;
            case R::MinusOneToMinusHalf: EXPECT_TRUE(nu > -1 && nu < -0.5 && !half); break;
        }
    }
}

TEST(EigenvalueEquation, ResidualFormsPerRegime) {
    const double mu = 3.7;
    EXPECT_DOUBLE_EQ(db::eigenvalue_equation(0.0)(mu), sf::bessel_j(0.0, mu) - sf::bessel_j(1.0, mu));
    EXPECT_DOUBLE_EQ(db::eigenvalue_equation(-0.5)(mu), sf::bessel_j(-0.5, mu));
    EXPECT_DOUBLE_EQ(db::eigenvalue_equation(-2.3)(mu), sf::bessel_j(2.3, mu) + sf::bessel_j(1.3, mu));
    EXPECT_DOUBLE_EQ(db::eigenvalue_equation(0.75)(mu), sf::bessel_j(0.75, mu) - sf::bessel_j(1.75, mu));
    EXPECT_DOUBLE_EQ(db::eigenvalue_equation(-0.25)(mu), sf::bessel_j(-0.25, mu) - sf::bessel_j(0.75, mu));
    EXPECT_DOUBLE_EQ(db::eigenvalue_equation(-0.75)(mu), sf::bessel_j(0.75, mu) + sf::bessel_j(-0.25, mu));
}

TEST(BuildBasis, LowestModesMatchClosedFormsAndOracles) {
    const auto b0 = db::build_basis(db::FluxParameter(0.0), 2, 4);
    const auto& m0 = mode_at(b0, 0, 1);
    EXPECT_EQ(m0.regime, db::Regime::IntegerNu);
    EXPECT_NEAR(m0.mu, 1.4347, 1e-4);

    const auto bh = db::build_basis(db::FluxParameter(0.5), 2, 4);
    const auto& mh = mode_at(bh, 0, 1);
    EXPECT_EQ(mh.regime, db::Regime::ExactlyMinusHalf);
    EXPECT_DOUBLE_EQ(mh.nu, -0.5);
    EXPECT_NEAR(mh.mu, std::numbers::pi / 2, 1e-12);
    for (int m = 1; m <= 4; ++m) EXPECT_NEAR(mode_at(bh, 0, m).mu, (2 * m - 1) * std::numbers::pi / 2, 1e-11);

    const auto bq = db::build_basis(db::FluxParameter(0.25), 2, 4);
    const auto& mq = mode_at(bq, 1, 1);
    EXPECT_EQ(mq.regime, db::Regime::PositiveNu);
    EXPECT_DOUBLE_EQ(mq.nu, 0.75);
    EXPECT_NEAR(sf::bessel_j(0.75, mq.mu), sf::bessel_j(1.75, mq.mu), 1e-10);
}

TEST(BuildBasis, EveryModeSatisfiesItsInvariants) {
    for (double alpha : {0.0, 0.25, 0.5, 0.8}) {
        const auto basis = db::build_basis(db::FluxParameter(alpha), 8, 6);
        ASSERT_EQ(basis.size(), 17u * 6u);
        for (const auto& md : basis.modes) {
            EXPECT_DOUBLE_EQ(md.nu, md.index.l - alpha);
            EXPECT_EQ(md.regime, db::classify(md.nu));
            EXPECT_LE(std::abs(db::eigenvalue_equation(md.nu)(md.mu)), 1e-10);
            // infinite-mass wall at r = 1
            const auto v = db::radial_values(md.nu, md.regime, md.mu);
            EXPECT_NEAR(v.chi / v.phi, 1.0, 1e-8) << "l=" << md.index.l << " m=" << md.index.m;
            // unit norm under an independent quadrature
            EXPECT_NEAR(overlap(md, md), 1.0, 1e-8) << "l=" << md.index.l << " m=" << md.index.m;
            if (md.index.m > 1) {
                EXPECT_GT(md.mu, mode_at(basis, md.index.l, md.index.m - 1).mu);
            }
        }
    }
}

TEST(BuildBasis, SameChannelModesAreOrthogonal) {
    const auto basis = db::build_basis(db::FluxParameter(0.3), 3, 5);
    for (int l = -3; l <= 3; ++l) {
        for (int m = 1; m <= 5; ++m) {
            for (int n = m + 1; n <= 5; ++n) {
                EXPECT_NEAR(overlap(mode_at(basis, l, m), mode_at(basis, l, n)), 0.0, 1e-6)
                    << "l=" << l << " m=" << m << " m'=" << n;
            }
        }
    }
}

TEST(BuildBasis, FluxPeriodicityRelabelsChannels) {
    const double alpha = 0.37;
    const int l_max = 6, m_max = 5;
    const auto a = db::build_basis(db::FluxParameter(alpha), -l_max, l_max, m_max);
    const auto b = db::build_basis(db::FluxParameter::unreduced(alpha + 1.0), -l_max + 1, l_max + 1, m_max);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.modes[i].index.l + 1, b.modes[i].index.l);
        EXPECT_NEAR(a.modes[i].mu, b.modes[i].mu, 1e-10);
    }
}

TEST(RadialFunctions, SimplifiedFormsPerBranch) {
    db::BasisMode m;
    m.nu = 0.0;
    m.mu = 2.0;
    m.regime = db::Regime::IntegerNu;
    auto rp = db::radial_functions(m);
    EXPECT_DOUBLE_EQ(rp.phi(0.4), sf::bessel_j(0.0, 0.8));
    EXPECT_DOUBLE_EQ(rp.chi(0.4), sf::bessel_j(1.0, 0.8));

    m.nu = -1.5;
    m.regime = db::classify(-1.5);
    rp = db::radial_functions(m);
    EXPECT_DOUBLE_EQ(rp.phi(0.4), sf::bessel_j(1.5, 0.8));
    EXPECT_DOUBLE_EQ(rp.chi(0.4), -sf::bessel_j(0.5, 0.8));

    m.nu = -0.5;
    m.regime = db::Regime::ExactlyMinusHalf;
    m.mu = std::numbers::pi / 2;
    rp = db::radial_functions(m);
    EXPECT_NEAR(rp.phi(1.0), sf::bessel_j(0.5, m.mu), 1e-15);
    EXPECT_NEAR(rp.chi(1.0) / rp.phi(1.0), 1.0, 1e-14);
}

TEST(EvaluateMode, PhasesAndBoundaryRatio) {
    const auto basis = db::build_basis(db::FluxParameter(0.2), 3, 3);
    for (const auto& md : basis.modes) {
        const auto at0 = db::evaluate_mode(md, 0.6, 0.0);
        const auto v = db::radial_values(md.nu, md.regime, md.mu * 0.6);
        EXPECT_NEAR(std::abs(at0.first - md.norm * v.phi), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(at0.second - std::complex<double>(0.0, md.norm * v.chi)), 0.0, 1e-14);
        for (double th : {0.3, 1.9, -2.4}) {
            const auto w = db::evaluate_mode(md, 1.0, th);
            const auto ratio = w.second / w.first;
            EXPECT_NEAR(std::abs(ratio - std::complex<double>(0.0, 1.0) * std::polar(1.0, th)), 0.0, 1e-8);
        }
    }
    EXPECT_THROW(db::evaluate_mode(basis.modes.front(), 0.0, 0.0), diracscar::DomainError);
    EXPECT_THROW(db::evaluate_mode(basis.modes.front(), 1.5, 0.0), diracscar::DomainError);
}

TEST(EvaluateMode, GroundStateAgainstExtendedPrecisionOracle) {
    const auto basis = db::build_basis(db::FluxParameter(0.0), 1, 1);
    const auto& md = mode_at(basis, 0, 1);
    // Oracle: 50-digit Bessel values and a 50-digit Gauss-Legendre normalisation.
    using boost::math::cyl_bessel_j;
    const big mu = md.mu;
    const auto rule = diracscar::quadrature::gauss_legendre(80, 0.0, 1.0);
    big acc = 0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const big r = rule.nodes[i];
        const big j0 = cyl_bessel_j(0, mu * r), j1 = cyl_bessel_j(1, mu * r);
        acc += big(rule.weights[i]) * r * (j0 * j0 + j1 * j1);
    }
    const big norm = 1 / sqrt(2 * boost::math::constants::pi<big>() * acc);
    const big r = big("0.5");
    const double psi1 = (norm * cyl_bessel_j(0, mu * r)).convert_to<double>();
    const double psi2 = (norm * cyl_bessel_j(1, mu * r)).convert_to<double>();
    const auto v = db::evaluate_mode(md, 0.5, 0.0);
    EXPECT_NEAR(v.first.real(), psi1, 1e-10);
    EXPECT_NEAR(v.second.imag(), psi2, 1e-10);
}

TEST(BuildBasis, RejectsBadTruncationAndDumpsCsv) {
    EXPECT_THROW(db::build_basis(db::FluxParameter(0.0), 0, 3), diracscar::DomainError);
    EXPECT_THROW(db::build_basis(db::FluxParameter(0.0), 2, 0), diracscar::DomainError);
    const auto basis = db::build_basis(db::FluxParameter(0.5), 1, 2);
    std::ostringstream os;
    db::write_basis_csv(os, basis);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("l,m,nu,mu,regime,norm\n", 0), 0u);
    EXPECT_NE(s.find("ExactlyMinusHalf"), std::string::npos);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 3 * 2);
}

TEST(BuildBasis, WindowCoverageFlag) {
    db::BasisOptions opt;
    opt.k_target = 30.0;
    EXPECT_FALSE(db::build_basis(db::FluxParameter(0.0), 4, 3, opt).spans_window);
    EXPECT_TRUE(db::build_basis(db::FluxParameter(0.0), 4, 14, opt).spans_window);
}
