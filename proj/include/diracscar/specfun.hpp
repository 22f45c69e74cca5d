#pragma once

// Real-order Bessel functions and bracketing root search.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "diracscar/errors.hpp"

namespace diracscar::specfun {

/// Validated evaluation envelope.
inline constexpr double kMaxOrder = 200.0;
inline constexpr double kMaxArgument = 1.0e4;

/// Root scan step; disk eigenvalue branches are spaced by roughly pi/2 or more.
inline constexpr double kScanStep = std::numbers::pi / 8.0;

/// Order of a Bessel function. Any finite real, fractional or negative.
class BesselOrder {
public:
    BesselOrder(double nu) : nu_(nu) {  // NOLINT(google-explicit-constructor)
        if (!std::isfinite(nu)) throw DomainError("Bessel order must be finite");
    }
    double value() const noexcept { return nu_; }
    operator double() const noexcept { return nu_; }  // NOLINT(google-explicit-constructor)

    /// Nonzero when the order is an exact integer; the integer is returned through `n`.
    bool is_integer(long& n) const noexcept {
        double r = std::round(nu_);
        if (r != nu_) return false;
        n = static_cast<long>(r);
        return true;
    }

private:
    double nu_;
};

struct RootBracket {
    double lo;
    double hi;
    double f_lo;
    double f_hi;
};

namespace detail {

inline void check_envelope(double nu, double x) {
    if (!(x > 0.0)) {
        std::ostringstream os;
        os << "Bessel argument must be positive, got x=" << x;
        throw DomainError(os.str());
    }
    if (std::abs(nu) > kMaxOrder || x > kMaxArgument) {
        std::ostringstream os;
        os << "Bessel request (nu=" << nu << ", x=" << x << ") outside validated envelope";
        throw AccuracyError(os.str());
    }
}

using boost_policy = boost::math::policies::policy<
    boost::math::policies::promote_double<false>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>>;

inline double sign_for_integer(long n) { return (n % 2 == 0) ? 1.0 : -1.0; }

}  // namespace detail

/// J_nu(x) for x > 0.
inline double bessel_j(BesselOrder order, double x) {
    const double nu = order.value();
    detail::check_envelope(nu, x);
    long n = 0;
    if (order.is_integer(n) && n < 0) {
        // J_{-n} = (-1)^n J_n, applied before any series to stay clear of Gamma poles.
        return detail::sign_for_integer(n) *
               boost::math::cyl_bessel_j(static_cast<double>(-n), x, detail::boost_policy{});
    }
    return boost::math::cyl_bessel_j(nu, x, detail::boost_policy{});
}

/// N_nu(x) (Neumann / second kind) for x > 0. Integer orders use the limiting form.
inline double bessel_y(BesselOrder order, double x) {
    const double nu = order.value();
    detail::check_envelope(nu, x);
    long n = 0;
    if (order.is_integer(n) && n < 0) {
        return detail::sign_for_integer(n) *
               boost::math::cyl_neumann(static_cast<double>(-n), x, detail::boost_policy{});
    }
    if (nu < 0.0) {
        // N_{-v} = sin(v pi) J_v + cos(v pi) N_v with v = -nu > 0.
        const double v = -nu;
        const double s = boost::math::sin_pi(v);
        const double c = boost::math::cos_pi(v);
        return s * boost::math::cyl_bessel_j(v, x, detail::boost_policy{}) +
               c * boost::math::cyl_neumann(v, x, detail::boost_policy{});
    }
    return boost::math::cyl_neumann(nu, x, detail::boost_policy{});
}

/// Refines a sign-change bracket to a root: bisection down to a few ulps, then one
/// secant step from the final bracket when it improves the residual.
template <class F>
double refine_root(F&& f, RootBracket b) {
    double lo = b.lo, hi = b.hi, flo = b.f_lo, fhi = b.f_hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    double best = std::abs(flo) <= std::abs(fhi) ? lo : hi;
    if (fhi != flo) {
        const double sec = hi - fhi * (hi - lo) / (fhi - flo);
        if (sec > lo && sec < hi) {
            const double fs = f(sec);
            if (std::abs(fs) < std::min(std::abs(flo), std::abs(fhi))) best = sec;
        }
    }
    return best;
}

/// Sign-change brackets of `f` on (0, k_max], scanned with step `step`.
/// Exact zeros and underflowed samples are skipped when looking for sign flips.
template <class F>
std::vector<RootBracket> scan_brackets(F&& f, double k_max, double step = kScanStep,
                                       std::size_t max_brackets = static_cast<std::size_t>(-1)) {
    std::vector<RootBracket> out;
    double prev_x = 0.0, prev_f = 0.0;
    bool have_prev = false;
    const auto n_steps = static_cast<long>(std::ceil(k_max / step));
    for (long i = 1; i <= n_steps && out.size() < max_brackets; ++i) {
        const double x = std::min(static_cast<double>(i) * step, k_max);
        const double fx = f(x);
        if (!std::isfinite(fx) || fx == 0.0) {
            if (fx == 0.0 && have_prev) {
                // landed exactly on a root; bracket it with a tiny interval
                out.push_back({x, x, 0.0, 0.0});
                have_prev = false;
            }
            continue;
        }
        if (have_prev && std::signbit(fx) != std::signbit(prev_f)) {
            out.push_back({prev_x, x, prev_f, fx});
        }
        prev_x = x;
        prev_f = fx;
        have_prev = true;
    }
    return out;
}

/// First `n_roots` roots of `f` in (0, k_max], increasing. Throws NumericError on shortfall.
template <class F>
std::vector<double> find_roots(F&& f, double k_max, std::size_t n_roots, double step = kScanStep) {
    if (!(k_max > 0.0)) throw DomainError("find_roots: k_max must be positive");
    if (n_roots == 0) throw DomainError("find_roots: n_roots must be positive");
    const auto brackets = scan_brackets(f, k_max, step, n_roots);
    if (brackets.size() < n_roots) {
        std::ostringstream os;
        os << "find_roots: only " << brackets.size() << " sign changes below k_max=" << k_max
           << ", " << n_roots << " requested";
        throw NumericError(os.str());
    }
    std::vector<double> roots;
    roots.reserve(n_roots);
    for (const auto& b : brackets) {
        roots.push_back(b.lo == b.hi ? b.lo : refine_root(f, b));
    }
    return roots;
}

}  // namespace diracscar::specfun
