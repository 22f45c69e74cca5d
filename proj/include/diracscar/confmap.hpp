#pragma once

// Cubic conformal map w(z) = (z + b z^2 + c e^{i delta} z^3) / sqrt(1 + 2b^2 + 3c^2) from the
// unit disk onto the billiard domain.

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "diracscar/errors.hpp"

namespace diracscar::confmap {

using cplx = std::complex<double>;

inline constexpr std::size_t kUnivalenceGrid = 4096;

class BilliardShape {
public:
    BilliardShape(double b, double c, double delta) : b_(b), c_(c), delta_(delta) {
        if (!std::isfinite(b) || !std::isfinite(c) || !std::isfinite(delta))
            throw ConfigError("shape parameters must be finite");
        norm_ = std::sqrt(1.0 + 2.0 * b * b + 3.0 * c * c);
        cdelta_ = std::polar(c, delta);
        if (!derivative_nonvanishing()) {
            std::ostringstream os;
            os << "shape (b=" << b << ", c=" << c << ", delta=" << delta
               << ") has a vanishing derivative on the unit circle";
            throw ConfigError(os.str());
        }
    }

    static BilliardShape heart() { return {0.49, 0.0, 0.0}; }
    static BilliardShape africa() { return {0.2, 0.2, std::numbers::pi / 3.0}; }
    static BilliardShape disk() { return {0.0, 0.0, 0.0}; }

    /// "heart", "africa" or "disk".
    static std::optional<BilliardShape> preset(const std::string& name) {
        if (name == "heart") return heart();
        if (name == "africa") return africa();
        if (name == "disk") return disk();
        return std::nullopt;
    }

    double b() const noexcept { return b_; }
    double c() const noexcept { return c_; }
    double delta() const noexcept { return delta_; }
    double norm() const noexcept { return norm_; }
    cplx c_phase() const noexcept { return cdelta_; }

    bool mirror_symmetric() const noexcept {
        return c_ == 0.0 || std::sin(delta_) == 0.0;
    }

private:
    // |w'| > 0 on the boundary grid and arg(z w'(z)) winds exactly once, so w' has no
    // zero inside the disk (argument principle).
    bool derivative_nonvanishing() const {
        double total = 0.0, prev = 0.0;
        for (std::size_t j = 0; j <= kUnivalenceGrid; ++j) {
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) /
                               static_cast<double>(kUnivalenceGrid);
            const cplx z = std::polar(1.0, phi);
            const cplx d = 1.0 + 2.0 * b_ * z + 3.0 * cdelta_ * z * z;
            if (!(std::abs(d) > 0.0)) return false;
            const double ang = std::arg(z * d);
            if (j > 0) {
                double step = ang - prev;
                while (step > std::numbers::pi) step -= 2.0 * std::numbers::pi;
                while (step < -std::numbers::pi) step += 2.0 * std::numbers::pi;
                total += step;
            }
            prev = ang;
        }
        return std::abs(total - 2.0 * std::numbers::pi) < 1e-6;
    }

    double b_, c_, delta_;
    double norm_ = 1.0;
    cplx cdelta_;
};

inline cplx map(const BilliardShape& s, cplx z) {
    return z * (1.0 + z * (s.b() + s.c_phase() * z)) / s.norm();
}

inline cplx derivative(const BilliardShape& s, cplx z) {
    return (1.0 + z * (2.0 * s.b() + 3.0 * s.c_phase() * z)) / s.norm();
}

inline double jacobian_sq(const BilliardShape& s, cplx z) { return std::norm(derivative(s, z)); }

/// Pre-image z in the closed unit disk of a point w of the billiard, by Newton iteration.
/// Returns nullopt if the iteration leaves the disk or fails to converge.
inline std::optional<cplx> inverse_map(const BilliardShape& s, cplx w, cplx guess) {
    cplx z = guess;
    for (int it = 0; it < 60; ++it) {
        const cplx f = map(s, z) - w;
        const cplx d = derivative(s, z);
        if (std::abs(d) < 1e-14) return std::nullopt;
        const cplx step = f / d;
        z -= step;
        if (std::abs(z) > 1.5) return std::nullopt;
        if (std::abs(step) < 1e-14) {
            if (std::abs(z) > 1.0 + 1e-9) return std::nullopt;
            return z;
        }
    }
    return std::nullopt;
}

struct BoundaryPoint {
    double phi = 0.0;           // disk angle of the pre-image
    double s = 0.0;             // arc length from the positive-u crossing
    cplx position;              // u + iv
    double normal_angle = 0.0;  // outward normal, continuous (unwrapped) along the circuit
};

/// Outward normal angle at disk angle phi: arg(z w'(z)) at z = e^{i phi}.
inline double normal_angle_at(const BilliardShape& s, double phi) {
    const cplx z = std::polar(1.0, phi);
    return std::arg(z * derivative(s, z));
}

/// Disk angle of the boundary crossing with the positive u axis (near phi = 0).
inline double positive_u_crossing(const BilliardShape& s) {
    auto im = [&](double phi) { return std::imag(map(s, std::polar(1.0, phi))); };
    double lo = -0.5, hi = 0.5;
    double flo = im(lo);
    if (std::signbit(flo) == std::signbit(im(hi))) return 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = im(mid);
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Total boundary length, int_0^{2pi} |w'(e^{i phi})| d phi, by the periodic trapezoid rule.
inline double perimeter(const BilliardShape& s, std::size_t n = 8192) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        acc += std::abs(derivative(s, std::polar(1.0, phi)));
    }
    return acc * 2.0 * std::numbers::pi / static_cast<double>(n);
}

/// Area enclosed by the image of the unit circle: pi * sum_n n |a_n|^2.
inline double area(const BilliardShape& s) {
    return std::numbers::pi * (1.0 + 2.0 * s.b() * s.b() + 3.0 * s.c() * s.c()) /
           (s.norm() * s.norm());
}

/// Arc length along the boundary from disk angle a to b (b >= a), Gauss-Legendre on |w'|.
inline double arc_length(const BilliardShape& s, double a, double b, std::size_t panels = 64) {
    static const double x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
    static const double wt[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    const double h = (b - a) / static_cast<double>(panels);
    double acc = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = a + h * (static_cast<double>(p) + 0.5);
        for (int q = 0; q < 8; ++q)
            acc += wt[q] * std::abs(derivative(s, std::polar(1.0, mid + 0.5 * h * x[q])));
    }
    return 0.5 * h * acc;
}

/// Signed radius of curvature of the boundary at disk angle phi (positive where the
/// boundary is convex, negative in dents): |z w'| / (1 + Re(z w''/w')).
inline double curvature_radius(const BilliardShape& s, double phi) {
    const cplx z = std::polar(1.0, phi);
    const cplx d1 = derivative(s, z);
    const cplx d2 = (2.0 * s.b() + 6.0 * s.c_phase() * z) / s.norm();
    return std::abs(d1) / (1.0 + std::real(z * d2 / d1));
}

/// Boundary point at disk angle phi, with s measured from the positive-u crossing in
/// [0, perimeter) and the normal angle reduced to (-pi, pi].
inline BoundaryPoint boundary_point(const BilliardShape& s, double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double phi0 = positive_u_crossing(s);
    double t = std::fmod(phi - phi0, two_pi);
    if (t < 0.0) t += two_pi;
    const cplx z = std::polar(1.0, phi);
    return {phi, arc_length(s, phi0, phi0 + t), map(s, z), normal_angle_at(s, phi)};
}

/// Uniform samples in disk angle phi_j = 2 pi j / n. Arc length accumulated by the
/// trapezoid rule on |w'| and shifted so s = 0 at the positive-u crossing.
inline std::vector<BoundaryPoint> boundary(const BilliardShape& s, std::size_t n_points) {
    if (n_points < 64) throw DomainError("boundary: need at least 64 points");
    std::vector<BoundaryPoint> pts(n_points);
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n_points);
    double prev_speed = 0.0, prev_angle = 0.0, acc = 0.0;
    for (std::size_t j = 0; j < n_points; ++j) {
        const double phi = h * static_cast<double>(j);
        const cplx z = std::polar(1.0, phi);
        const double speed = std::abs(derivative(s, z));
        double ang = normal_angle_at(s, phi);
        if (j > 0) {
            acc += 0.5 * h * (speed + prev_speed);
            while (ang - prev_angle > std::numbers::pi) ang -= 2.0 * std::numbers::pi;
            while (ang - prev_angle < -std::numbers::pi) ang += 2.0 * std::numbers::pi;
        }
        pts[j] = {phi, acc, map(s, z), ang};
        prev_speed = speed;
        prev_angle = ang;
    }
    // arc length of the crossing point, to re-origin s
    const double phi0 = positive_u_crossing(s);
    const double total = acc + 0.5 * h * (prev_speed + std::abs(derivative(s, cplx(1.0, 0.0))));
    double s0 = 0.0;
    {
        // integrate from 0 to phi0 (phi0 may be negative)
        const int m = 256;
        const double dh = phi0 / m;
        for (int k = 0; k < m; ++k) {
            const double a = dh * k, b2 = dh * (k + 1);
            s0 += 0.5 * dh *
                  (std::abs(derivative(s, std::polar(1.0, a))) + std::abs(derivative(s, std::polar(1.0, b2))));
        }
    }
    for (auto& p : pts) {
        p.s = std::fmod(p.s - s0 + total, total);
    }
    return pts;
}

/// CSV: s,u,v,normal_angle.
inline void write_boundary_csv(std::ostream& os, const std::vector<BoundaryPoint>& pts) {
    os << "s,u,v,normal_angle\n";
    char buf[160];
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.s, p.position.real(),
                      p.position.imag(), p.normal_angle);
        os << buf;
    }
}

}  // namespace diracscar::confmap
