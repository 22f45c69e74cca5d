#pragma once

// Closed-form physics layer: spin-reflection phase accumulated along periodic orbits, the
// resulting level formula k = (2pi/L)(n - W alpha + sigma/4 - beta), the plane-wave model of a
// single reflection at a straight mass wall, and the symmetry operations (-E, time reversal,
// parity, mirror) acting on spinor fields.
//
// Units: hbar = v_F = 1, so energies are wavevectors.

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diracscar/errors.hpp"
#include "diracscar/orbits.hpp"
#include "diracscar/spectral.hpp"

namespace diracscar::semiclassics {

using cplx = std::complex<double>;
using orbits::Orbit;
using orbits::Orientation;

// ---------------------------------------------------------------------------------------
// Phase accumulation along an orbit

struct PhaseAccumulation {
    double delta = 0.0;       // total boundary phase for the requested orientation
    double delta_other = 0.0; // same for the opposite orientation
    double chiral_gap = 0.0;  // (delta - delta_other) mod 2pi, in [0, 2pi)
};

namespace detail {

inline double wrap_two_pi(double a) {
    const double t = 2.0 * std::numbers::pi;
    a = std::fmod(a, t);
    if (a < 0.0) a += t;
    if (a >= t) a -= t;
    return a;
}

/// Sum over bounces of the local spin phase 1/2 (pi + 2 theta~ - 2 theta_in), where theta_in
/// is the direction of the incoming chord and the direction change is measured as a
/// counterclockwise rotation in [0, 2pi).
inline double orbit_phase(const Orbit& o) {
    const auto p = o.polygon();
    const std::size_t n = p.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx in = p[i] - p[(i + n - 1) % n];
        const double theta_in = std::arg(in);
        total += wrap_two_pi(std::numbers::pi + 2.0 * o.vertices[i].normal_angle - 2.0 * theta_in);
    }
    return 0.5 * total;
}

inline Orbit oriented(const Orbit& o, Orientation want) {
    return o.orientation == want ? o : orbits::reversed(o);
}

}  // namespace detail

/// Boundary phase along the orbit traversed with the given orientation, the phase for the
/// reversed traversal, and their difference modulo 2pi.
inline PhaseAccumulation accumulate_phase(const Orbit& orbit, Orientation o) {
    PhaseAccumulation r;
    r.delta = detail::orbit_phase(detail::oriented(orbit, o));
    r.delta_other = detail::orbit_phase(detail::oriented(orbit, orbits::flipped(o)));
    r.chiral_gap = detail::wrap_two_pi(r.delta - r.delta_other);
    if (2.0 * std::numbers::pi - r.chiral_gap < 1e-9) r.chiral_gap = 0.0;
    return r;
}

/// Level data of one orbit: spin phase beta (turns, in [0,1)) and predicted level position
/// Gamma = mod(sigma/4 - beta, 1) for each orientation.
struct OrbitPhaseData {
    const Orbit* orbit = nullptr;
    int sigma = 0;
    double beta_ccw = 0.0;
    double beta_cw = 0.0;
    double gamma_ccw = 0.0;
    double gamma_cw = 0.0;

    double beta(Orientation o) const { return o == Orientation::CCW ? beta_ccw : beta_cw; }
    double gamma_pred(Orientation o) const { return o == Orientation::CCW ? gamma_ccw : gamma_cw; }
    /// Winding number signed by the traversal direction.
    int winding(Orientation o) const {
        const int w = orbit->orientation == Orientation::CCW ? orbit->winding : -orbit->winding;
        return o == Orientation::CCW ? w : -w;
    }
};

inline double mod1(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f -= 1.0;
    // Snap rounding noise so exact rationals land on their canonical representative.
    if (std::abs(f - std::round(f)) < 1e-9) f = 0.0;
    return f;
}

inline OrbitPhaseData phase_data(const Orbit& orbit) {
    OrbitPhaseData d;
    d.orbit = &orbit;
    d.sigma = orbit.maslov;
    const auto ccw = accumulate_phase(orbit, Orientation::CCW);
    d.beta_ccw = mod1(ccw.delta / (2.0 * std::numbers::pi));
    d.beta_cw = mod1(ccw.delta_other / (2.0 * std::numbers::pi));
    d.gamma_ccw = mod1(d.sigma / 4.0 - d.beta_ccw);
    d.gamma_cw = mod1(d.sigma / 4.0 - d.beta_cw);
    return d;
}

struct PredictedLevel {
    int n = 0;
    Orientation orientation = Orientation::CCW;
    double k = 0.0;
};

/// k = (2pi/L)(n - W alpha + sigma/4 - beta) for both orientations over n in [n_lo, n_hi];
/// non-positive k are skipped.
inline std::vector<PredictedLevel> predict_levels(const OrbitPhaseData& d, double alpha, int n_lo, int n_hi) {
    std::vector<PredictedLevel> out;
    const double L = d.orbit->length;
    for (Orientation o : {Orientation::CCW, Orientation::CW}) {
        const double shift = -d.winding(o) * alpha + d.sigma / 4.0 - d.beta(o);
        for (int n = n_lo; n <= n_hi; ++n) {
            const double k = 2.0 * std::numbers::pi / L * (n + shift);
            if (k > 0.0) out.push_back({n, o, k});
        }
    }
    return out;
}

/// Wavevector difference between a scar and its time-reversed partner:
/// 2pi(dn - 2W alpha)/L for even bounce counts, 2pi(dn - 2W alpha + 1/2)/L for odd ones.
inline double delta_k_reversed(const Orbit& orbit, double alpha, int delta_n) {
    const int w = std::abs(orbit.winding);
    double x = delta_n - 2.0 * w * alpha;
    if (orbit.bounces % 2 == 1) x += 0.5;
    return 2.0 * std::numbers::pi * x / orbit.length;
}

inline void write_predictions_csv(std::ostream& os, const std::vector<Orbit>& catalog, double alpha, double k_max) {
    os << "orbit,orientation,n,k_pred\n";
    char buf[160];
    for (const auto& o : catalog) {
        const auto d = phase_data(o);
        const int n_hi = static_cast<int>(std::ceil(k_max * o.length / (2.0 * std::numbers::pi))) + 2;
        for (const auto& p : predict_levels(d, alpha, 0, n_hi)) {
            if (p.k > k_max) continue;
            std::snprintf(buf, sizeof buf, "%s,%s,%d,%.12g\n", o.label.c_str(),
                          orbits::to_string(p.orientation).c_str(), p.n, p.k);
            os << buf;
        }
    }
}

// ---------------------------------------------------------------------------------------
// Plane-wave reflection at a straight mass wall

/// A plane wave of energy sign s_E and wavevector magnitude E travels towards the wall x = 0
/// with direction of motion at angle theta0 to the wall normal; the region x > 0 carries the
/// mass term s_V V sigma_z. potential = +infinity selects the hard-wall limit.
struct PlaneWaveScenario {
    int energy_sign = 1;
    int potential_sign = 1;
    double potential = std::numeric_limits<double>::infinity();
    double incident_angle = 0.0;
    double E = 1.0;
};

struct ReflectionResult {
    cplx R;
    cplx T;
    double gamma_angle = 0.0;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double lambda_ratio = 1.0;
    double K = 0.0;
    double q_decay = std::numeric_limits<double>::infinity();
    cplx wall_ratio;  // psi_2 / psi_1 of the evanescent spinor
};

/// Spinor moving along angle theta: (e^{-i theta/2}, e^{i theta/2}) / sqrt(2).
inline std::array<cplx, 2> direction_spinor(double theta) {
    const double s = 1.0 / std::numbers::sqrt2;
    return {std::polar(s, -0.5 * theta), std::polar(s, 0.5 * theta)};
}

inline void validate(const PlaneWaveScenario& s) {
    if (s.energy_sign != 1 && s.energy_sign != -1) throw DomainError("energy sign must be +1 or -1");
    if (s.potential_sign != 1 && s.potential_sign != -1) throw DomainError("potential sign must be +1 or -1");
    if (!(s.E > 0.0)) throw DomainError("plane wave: E must be positive");
    if (!(s.potential > s.E)) throw DomainError("plane wave: requires V > E (evanescent wall)");
    if (!(std::abs(s.incident_angle) < 0.5 * std::numbers::pi))
        throw DomainError("plane wave: incident angle must lie in (-pi/2, pi/2)");
}

/// Matches incident + reflected waves to the evanescent wall solution at x = 0.
/// The reflected direction is theta1 = pi - theta0 (specular at a wall with normal angle 0).
inline ReflectionResult reflect_plane_wave(const PlaneWaveScenario& s) {
    validate(s);
    const double th = s.incident_angle;
    const double k = s.E;
    const double e = s.energy_sign * k;  // signed energy
    const double sv = s.potential_sign;
    ReflectionResult r;
    // Negative-energy waves move against their wavevector.
    r.K = s.energy_sign * k * std::sin(th);
    const cplx I(0.0, 1.0);
    if (std::isinf(s.potential)) {
        r.q_decay = std::numeric_limits<double>::infinity();
        r.wall_ratio = I * sv;
        r.lambda1 = r.lambda2 = r.lambda_ratio = 1.0;
    } else {
        const double V = s.potential;
        r.q_decay = std::sqrt(V * V - k * k + r.K * r.K);
        const double q = r.q_decay;
        r.wall_ratio = -I * (e - sv * V) / (q - r.K);
        const double den = std::abs(sv * V * q - e * r.K);
        r.lambda1 = std::sqrt(std::abs(sv * V + e) * (q - r.K) / den);
        r.lambda2 = std::sqrt(std::abs(sv * V - e) * (q + r.K) / den);
        r.lambda_ratio = r.lambda2 / r.lambda1;
    }
    const cplx rho = r.wall_ratio;
    const cplx e0 = std::polar(1.0, th);
    r.R = (rho - e0) / (I * (1.0 + rho * e0));
    r.gamma_angle = 0.5 * (std::arg(r.R) - th + 0.5 * std::numbers::pi);
    // Transmitted amplitude normalized on the lower spinor component lambda2 T / sqrt(2).
    r.T = (std::polar(1.0, 0.5 * th) + I * r.R * std::polar(1.0, -0.5 * th)) / r.lambda2;
    return r;
}

/// Closed forms for the (+E, +V) wall: lambda = lambda2/lambda1,
/// tan gamma = (1 - lambda sin theta0)/(lambda cos theta0), R = e^{i(2 gamma + theta0 - pi/2)}.
inline cplx closed_form_R(double lambda, double theta0) {
    const double g = std::atan2(1.0 - lambda * std::sin(theta0), lambda * std::cos(theta0));
    return std::polar(1.0, 2.0 * g + theta0 - 0.5 * std::numbers::pi);
}

/// <sigma_z> at the wall for the (+E, +V) case: 4 cos^2 gamma (Eq - VK)/((V-E)(q+K)).
inline double closed_form_sigma_z(double E, double V, double theta0) {
    const double K = E * std::sin(theta0);
    const double q = std::sqrt(V * V - E * E + K * K);
    const double lam = std::sqrt((V - E) * (q + K) / ((V + E) * (q - K)));
    const double g = std::atan2(1.0 - lam * std::sin(theta0), lam * std::cos(theta0));
    const double c = std::cos(g);
    return 4.0 * c * c * (E * q - V * K) / ((V - E) * (q + K));
}

/// Boundary spinor of incident + reflected waves at the wall, normalized as (1/sqrt2)(...).
inline std::array<cplx, 2> wall_spinor(const PlaneWaveScenario& s, const ReflectionResult& r) {
    const auto a = direction_spinor(s.incident_angle);
    const auto b = direction_spinor(std::numbers::pi - s.incident_angle);
    return {a[0] + r.R * b[0], a[1] + r.R * b[1]};
}

struct BoundarySpin {
    double spin = 0.0;          // +-1/2: eigenvalue of S_y = sigma_y / 2 on the wall spinor
    double eigen_residual = 0.0;// |sigma_y psi - 2 spin psi| / |psi|
    double sigma_z = 0.0;       // |psi_1|^2 - |psi_2|^2 at the wall
};

inline BoundarySpin boundary_spin(const PlaneWaveScenario& s) {
    const auto r = reflect_plane_wave(s);
    const auto psi = wall_spinor(s, r);
    const cplx I(0.0, 1.0);
    // sigma_y (a, b) = (-i b, i a)
    const cplx sa = -I * psi[1], sb = I * psi[0];
    const double nrm = std::sqrt(std::norm(psi[0]) + std::norm(psi[1]));
    const double sy = (std::conj(psi[0]) * sa + std::conj(psi[1]) * sb).real() / (nrm * nrm);
    BoundarySpin out;
    out.spin = sy >= 0.0 ? 0.5 : -0.5;
    const double ev = 2.0 * out.spin;
    out.eigen_residual = std::sqrt(std::norm(sa - ev * psi[0]) + std::norm(sb - ev * psi[1])) / nrm;
    out.sigma_z = std::norm(psi[0]) - std::norm(psi[1]);
    return out;
}

// ---------------------------------------------------------------------------------------
// Symmetry table for (+-E, +-V, identity/mirror)

struct SymmetryRow {
    int energy_sign = 1;
    int potential_sign = 1;
    bool mirror = false;
    double R = 0.0;        // hard-wall limit (real, +-1)
    int helicity = 0;      // sign of sigma.p/|p| on the incident wave
    int current = 0;       // +1 counterclockwise around the billiard interior
    int spin = 0;          // sign of in-plane spin along the counterclockwise tangent
    int sigma_z = 0;       // sign of <sigma_z> at the wall for finite V
    double residual = 0.0; // largest algebraic residual met while building the row
};

namespace detail {

inline int sgn(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

struct WallState {
    std::array<cplx, 2> psi;       // spinor at the wall
    std::array<double, 2> normal;  // outward normal of the wall
    std::array<double, 2> p_in;    // incident wavevector direction
    std::array<cplx, 2> incident;  // incident spinor
    cplx R;
};

inline WallState wall_state(const PlaneWaveScenario& s, bool mirror) {
    const auto r = reflect_plane_wave(s);
    WallState w;
    w.psi = wall_spinor(s, r);
    w.incident = direction_spinor(s.incident_angle);
    const double c = std::cos(s.incident_angle), sn = std::sin(s.incident_angle);
    w.p_in = {s.energy_sign * c, s.energy_sign * sn};
    w.normal = {1.0, 0.0};
    w.R = r.R;
    if (mirror) {
        // Psi'(x, y) = conj(Psi(-x, y)): spinors conjugate, x components flip, and the
        // former reflected wave becomes the incident one, so R' = 1 / conj(R).
        for (auto& v : w.psi) v = std::conj(v);
        const auto refl = direction_spinor(std::numbers::pi - s.incident_angle);
        w.incident = {std::conj(refl[0]), std::conj(refl[1])};
        // e^{i(px x + py y)} -> conj at (-x, y) turns wavevector (px, py) into (px, -py).
        w.p_in = {-s.energy_sign * c, -s.energy_sign * sn};
        w.normal = {-1.0, 0.0};
        w.R = 1.0 / std::conj(r.R);
    }
    return w;
}

}  // namespace detail

/// Evaluates one row of the symmetry table from the plane-wave model.
inline SymmetryRow symmetry_row(int energy_sign, int potential_sign, bool mirror, double theta0 = 0.3,
                                double finite_v_over_e = 10.0) {
    SymmetryRow row;
    row.energy_sign = energy_sign;
    row.potential_sign = potential_sign;
    row.mirror = mirror;
    PlaneWaveScenario s;
    s.energy_sign = energy_sign;
    s.potential_sign = potential_sign;
    s.incident_angle = theta0;
    const auto w = detail::wall_state(s, mirror);
    row.R = w.R.real();
    row.residual = std::abs(w.R.imag());

    // helicity: <sigma . p_hat> on the incident spinor
    const auto& a = w.incident;
    const cplx m01 = cplx(w.p_in[0], -w.p_in[1]);  // sigma.p = [[0, px - i py], [px + i py, 0]]
    const double h = 2.0 * (std::conj(a[0]) * m01 * a[1]).real();
    row.helicity = detail::sgn(h);

    // current u = 2 (Re psi1* psi2, Im psi1* psi2) at the wall; orientation from n x u
    const cplx j = 2.0 * std::conj(w.psi[0]) * w.psi[1];
    row.current = detail::sgn(w.normal[0] * j.imag() - w.normal[1] * j.real());

    // in-plane spin along the counterclockwise tangent t = z x n = (-n_y, n_x)
    const double sx = 2.0 * (std::conj(w.psi[0]) * w.psi[1]).real();
    const double sy = 2.0 * (std::conj(w.psi[0]) * w.psi[1]).imag();
    const double nrm = std::norm(w.psi[0]) + std::norm(w.psi[1]);
    const double tx = -w.normal[1], ty = w.normal[0];
    row.spin = detail::sgn((sx * tx + sy * ty) / nrm);

    s.potential = finite_v_over_e * s.E;
    auto wf = detail::wall_state(s, mirror);
    row.sigma_z = detail::sgn(std::norm(wf.psi[0]) - std::norm(wf.psi[1]));
    return row;
}

inline std::vector<SymmetryRow> symmetry_table(double theta0 = 0.3) {
    std::vector<SymmetryRow> t;
    for (int e : {1, -1})
        for (bool m : {false, true})
            for (int v : {1, -1}) t.push_back(symmetry_row(e, v, m, theta0));
    return t;
}

inline nlohmann::json to_json(const SymmetryRow& r) {
    return {{"energy", r.energy_sign > 0 ? "E" : "-E"},
            {"potential", r.potential_sign > 0 ? "V" : "-V"},
            {"operation", r.mirror ? "M" : "I"},
            {"R", r.R},
            {"helicity", r.helicity},
            {"scar_current", r.current},
            {"spin", r.spin},
            {"sigma_z", r.sigma_z},
            {"residual", r.residual}};
}

// ---------------------------------------------------------------------------------------
// Symmetry operations on spinor fields

enum class SymmetryOp { NegateE, TimeReversal, Combined, Parity, Mirror };

inline std::string to_string(SymmetryOp op) {
    switch (op) {
        case SymmetryOp::NegateE: return "negate_e";
        case SymmetryOp::TimeReversal: return "time_reversal";
        case SymmetryOp::Combined: return "combined";
        case SymmetryOp::Parity: return "parity";
        case SymmetryOp::Mirror: return "mirror";
    }
    return "?";
}

/// Pointwise and coordinate action of the symmetry operators on a z-plane field:
///   NegateE       sigma_x K          (psi2*, psi1*)
///   TimeReversal  i sigma_y K        (psi2*, -psi1*)
///   Combined      i sigma_y sigma_x  (psi1, -psi2)
///   Parity        R_y sigma_x        (psi2, psi1) at (x, -y)
///   Mirror        R_x K              (psi1*, psi2*) at (-x, y)
/// The reflection operators need a uniform angular grid starting at theta = 0 (and an even
/// number of angles for Mirror) so that the reflected points are grid points. The mapped
/// positions and rotations are those of the correspondingly reflected billiard.
inline spectral::WaveField symmetry_transform(const spectral::WaveField& f, SymmetryOp op) {
    spectral::WaveField g = f;
    const auto nr = f.grid.n_r(), nt = f.grid.n_theta();
    const bool reflect = op == SymmetryOp::Parity || op == SymmetryOp::Mirror;
    std::vector<std::size_t> src(f.psi1.size());
    for (std::size_t p = 0; p < src.size(); ++p) src[p] = p;
    if (reflect) {
        if (std::abs(f.grid.theta.front()) > 1e-14 ||
            std::abs(f.grid.dtheta * static_cast<double>(nt) - 2.0 * std::numbers::pi) > 1e-12)
            throw DomainError("symmetry_transform: angular grid is not uniform from theta = 0");
        if (op == SymmetryOp::Mirror && nt % 2 != 0)
            throw DomainError("symmetry_transform: mirror needs an even number of angles");
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nt; ++j) {
                // theta -> -theta (y -> -y) or theta -> pi - theta (x -> -x)
                const std::size_t jj = op == SymmetryOp::Parity ? (nt - j) % nt : (nt / 2 + nt - j) % nt;
                src[i * nt + j] = i * nt + jj;
            }
    }
    for (std::size_t p = 0; p < src.size(); ++p) {
        const cplx a = f.psi1[src[p]], b = f.psi2[src[p]];
        switch (op) {
            case SymmetryOp::NegateE: g.psi1[p] = std::conj(b); g.psi2[p] = std::conj(a); break;
            case SymmetryOp::TimeReversal: g.psi1[p] = std::conj(b); g.psi2[p] = -std::conj(a); break;
            case SymmetryOp::Combined: g.psi1[p] = a; g.psi2[p] = -b; break;
            case SymmetryOp::Parity: g.psi1[p] = b; g.psi2[p] = a; break;
            case SymmetryOp::Mirror: g.psi1[p] = std::conj(a); g.psi2[p] = std::conj(b); break;
        }
        if (reflect) {
            g.jac[p] = f.jac[src[p]];
            g.dir[p] = std::conj(f.dir[src[p]]);
            const cplx w = f.positions_w[src[p]];
            g.positions_w[p] = op == SymmetryOp::Parity ? std::conj(w) : -std::conj(w);
        }
    }
    return g;
}

}  // namespace diracscar::semiclassics
