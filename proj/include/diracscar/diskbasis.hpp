#pragma once

// Eigenmodes of the circular Dirac billiard (unit disk, infinite-mass wall) threaded by an
// Aharonov-Bohm flux through a vanishing inner hole. They are the expansion basis for the
// conformally mapped billiards.

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "diracscar/errors.hpp"
#include "diracscar/quadrature.hpp"
#include "diracscar/specfun.hpp"

namespace diracscar::diskbasis {

/// Flux through the origin in units of the flux quantum. The spectrum is periodic in it
/// with period one, so the default constructor path reduces modulo one.
class FluxParameter {
public:
    FluxParameter() = default;
    explicit FluxParameter(double alpha) : alpha_(alpha - std::floor(alpha)) {
        if (!std::isfinite(alpha)) throw DomainError("flux must be finite");
        if (alpha_ >= 1.0) alpha_ = 0.0;
    }
    /// Keeps alpha as given (no reduction); used to verify flux periodicity directly.
    static FluxParameter unreduced(double alpha) {
        if (!std::isfinite(alpha)) throw DomainError("flux must be finite");
        FluxParameter f;
        f.alpha_ = alpha;
        return f;
    }
    double value() const noexcept { return alpha_; }

private:
    double alpha_ = 0.0;
};

struct BasisIndex {
    int l = 0;
    int m = 1;
    friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

enum class Regime {
    IntegerNu,
    PositiveNu,
    BelowMinusOne,
    MinusHalfToZero,
    MinusOneToMinusHalf,
    ExactlyMinusHalf,
};

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::IntegerNu: return "IntegerNu";
        case Regime::PositiveNu: return "PositiveNu";
        case Regime::BelowMinusOne: return "BelowMinusOne";
        case Regime::MinusHalfToZero: return "MinusHalfToZero";
        case Regime::MinusOneToMinusHalf: return "MinusOneToMinusHalf";
        case Regime::ExactlyMinusHalf: return "ExactlyMinusHalf";
    }
    return "?";
}

/// Tolerance for treating nu as an exact integer or exactly -1/2.
inline constexpr double kOrderSnapTolerance = 1e-9;

inline Regime classify(double nu) {
    if (std::abs(nu - std::round(nu)) < kOrderSnapTolerance) return Regime::IntegerNu;
    if (std::abs(nu + 0.5) < kOrderSnapTolerance) return Regime::ExactlyMinusHalf;
    if (nu > 0.0) return Regime::PositiveNu;
    if (nu < -1.0) return Regime::BelowMinusOne;
    if (nu > -0.5) return Regime::MinusHalfToZero;
    return Regime::MinusOneToMinusHalf;
}

/// Order actually used for evaluation: snapped onto the integer / -1/2 for the exact regimes.
inline double effective_order(double nu, Regime r) {
    if (r == Regime::IntegerNu) return std::round(nu);
    if (r == Regime::ExactlyMinusHalf) return -0.5;
    return nu;
}

/// True when the upper radial component is the regular J_nu branch (nu > -1/2).
inline bool upper_branch(double nu_eff, Regime r) {
    return r != Regime::ExactlyMinusHalf && nu_eff > -0.5;
}

struct BasisMode {
    BasisIndex index;
    double nu = 0.0;
    double mu = 0.0;
    Regime regime = Regime::IntegerNu;
    double norm = 1.0;
};

/// Upper (phi) and lower (chi) radial components of a mode, unnormalised.
struct RadialPair {
    std::function<double(double)> phi;
    std::function<double(double)> chi;
};

/// Residual whose positive roots are the disk eigenvalues mu for order nu.
inline std::function<double(double)> eigenvalue_equation(double nu) {
    using specfun::bessel_j;
    const Regime r = classify(nu);
    const double v = effective_order(nu, r);
    switch (r) {
        case Regime::IntegerNu:
        case Regime::PositiveNu:
        case Regime::MinusHalfToZero:
            return [v](double mu) { return bessel_j(v, mu) - bessel_j(v + 1.0, mu); };
        case Regime::BelowMinusOne:
        case Regime::MinusOneToMinusHalf:
            return [v](double mu) { return bessel_j(-v, mu) + bessel_j(-(v + 1.0), mu); };
        case Regime::ExactlyMinusHalf:
            return [](double mu) { return bessel_j(-0.5, mu); };
    }
    throw DomainError("unreachable regime");
}

/// Radial components at a single point x = mu * r.
struct RadialValues {
    double phi;
    double chi;
};

inline RadialValues radial_values(double nu, Regime r, double x) {
    using specfun::bessel_j;
    const double v = effective_order(nu, r);
    if (r == Regime::ExactlyMinusHalf) {
        const double jm = bessel_j(-0.5, x);
        const double jp = bessel_j(0.5, x);
        return {jm + jp, jp - jm};
    }
    if (upper_branch(v, r)) return {bessel_j(v, x), bessel_j(v + 1.0, x)};
    return {bessel_j(-v, x), -bessel_j(-(v + 1.0), x)};
}

inline RadialPair radial_functions(const BasisMode& mode) {
    const double nu = mode.nu;
    const Regime reg = mode.regime;
    const double mu = mode.mu;
    return RadialPair{
        [=](double r) { return radial_values(nu, reg, mu * r).phi; },
        [=](double r) { return radial_values(nu, reg, mu * r).chi; },
    };
}

/// Spinor (psi_1, psi_2) of a normalised mode at polar point (r, theta).
inline std::pair<std::complex<double>, std::complex<double>> evaluate_mode(const BasisMode& mode,
                                                                          double r, double theta) {
    if (!(r > 0.0) || r > 1.0) throw DomainError("evaluate_mode: r must lie in (0, 1]");
    const auto v = radial_values(mode.nu, mode.regime, mode.mu * r);
    const double l = mode.index.l;
    const std::complex<double> i(0.0, 1.0);
    const auto psi1 = mode.norm * v.phi * std::polar(1.0, l * theta);
    const auto psi2 = i * mode.norm * v.chi * std::polar(1.0, (l + 1.0) * theta);
    return {psi1, psi2};
}

/// Gauss-Legendre order used for mode normalisation.
inline constexpr std::size_t kNormQuadratureOrder = 256;

/// 2*pi * int_0^1 (phi^2 + chi^2) r dr for a mode with unit N.
inline double radial_mass(double nu, Regime r, double mu, const quadrature::Rule& rule) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const auto v = radial_values(nu, r, mu * rule.nodes[i]);
        acc += rule.weights[i] * (v.phi * v.phi + v.chi * v.chi);
    }
    return 2.0 * std::numbers::pi * acc;
}

struct BasisOptions {
    /// Largest wavevector of interest; the basis warns (via `spans_window`) if the lowest
    /// angular channel does not reach `kWindowSafety * k_target`.
    double k_target = 30.0;
};

inline constexpr double kWindowSafety = 1.3;

struct Basis {
    double alpha = 0.0;
    int l_min = 0;
    int l_max = 0;
    int m_max = 0;
    std::vector<BasisMode> modes;  // ordered by l, then m
    bool spans_window = true;

    std::size_t size() const noexcept { return modes.size(); }
};

/// First m_max eigenvalues for order nu. The scan ceiling starts from the large-order
/// zero estimate and doubles on shortfall.
inline std::vector<double> channel_eigenvalues(double nu, int m_max) {
    const auto f = eigenvalue_equation(nu);
    double k_max = std::abs(nu) + 2.0 * std::cbrt(std::abs(nu) + 1.0) +
                   std::numbers::pi * (static_cast<double>(m_max) + 2.0);
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            return specfun::find_roots(f, std::min(k_max, specfun::kMaxArgument),
                                       static_cast<std::size_t>(m_max));
        } catch (const NumericError&) {
            if (k_max >= specfun::kMaxArgument) throw;
            k_max *= 2.0;
        }
    }
    return specfun::find_roots(f, std::min(k_max, specfun::kMaxArgument),
                               static_cast<std::size_t>(m_max));
}

/// Modes with l in [l_lo, l_hi] and 1 <= m <= m_max at the given flux.
inline Basis build_basis(FluxParameter alpha, int l_lo, int l_hi, int m_max,
                         const BasisOptions& opt = {}) {
    if (l_hi < l_lo) throw DomainError("build_basis: empty angular range");
    if (m_max < 1) throw DomainError("build_basis: m_max must be >= 1");
    Basis basis;
    basis.alpha = alpha.value();
    basis.l_min = l_lo;
    basis.l_max = l_hi;
    basis.m_max = m_max;
    basis.modes.reserve(static_cast<std::size_t>(l_hi - l_lo + 1) * static_cast<std::size_t>(m_max));
    const auto rule = quadrature::radial_area_rule(kNormQuadratureOrder);
    double lowest_channel_top = 0.0;
    for (int l = l_lo; l <= l_hi; ++l) {
        const double nu = static_cast<double>(l) - alpha.value();
        const Regime reg = classify(nu);
        const auto mus = channel_eigenvalues(nu, m_max);
        lowest_channel_top = std::max(lowest_channel_top, mus.back());
        for (int m = 1; m <= m_max; ++m) {
            BasisMode mode;
            mode.index = {l, m};
            mode.nu = nu;
            mode.mu = mus[static_cast<std::size_t>(m - 1)];
            mode.regime = reg;
            mode.norm = 1.0 / std::sqrt(radial_mass(nu, reg, mode.mu, rule));
            basis.modes.push_back(mode);
        }
    }
    basis.spans_window = lowest_channel_top >= kWindowSafety * opt.k_target;
    return basis;
}

/// Symmetric truncation |l| <= l_max.
inline Basis build_basis(FluxParameter alpha, int l_max, int m_max, const BasisOptions& opt = {}) {
    if (l_max < 1) throw DomainError("build_basis: l_max must be >= 1");
    return build_basis(alpha, -l_max, l_max, m_max, opt);
}

/// CSV dump: l,m,nu,mu,regime,norm.
inline void write_basis_csv(std::ostream& os, const Basis& basis) {
    os << "l,m,nu,mu,regime,norm\n";
    char buf[256];
    for (const auto& md : basis.modes) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%s,%.17g\n", md.index.l, md.index.m, md.nu,
                      md.mu, std::string(to_string(md.regime)).c_str(), md.norm);
        os << buf;
    }
}

}  // namespace diracscar::diskbasis
