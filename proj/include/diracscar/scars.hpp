#pragma once

// Scar detection on periodic-orbit tubes, current orientation, and the chirality
// diagnostics eta (level offsets between repetitions) and Gamma = mod(kL/2pi, 1).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diracscar/confmap.hpp"
#include "diracscar/orbits.hpp"
#include "diracscar/spectral.hpp"

namespace diracscar::scars {

using cplx = std::complex<double>;
using orbits::Orbit;
using spectral::Spectrum;
using spectral::WaveField;

enum class ScarOrientation { CCW, CW, Indeterminate };

inline std::string to_string(ScarOrientation o) {
    switch (o) {
        case ScarOrientation::CCW: return "CCW";
        case ScarOrientation::CW: return "CW";
        case ScarOrientation::Indeterminate: return "Indeterminate";
    }
    return "?";
}

inline ScarOrientation parse_orientation(const std::string& s) {
    if (s == "CCW") return ScarOrientation::CCW;
    if (s == "CW") return ScarOrientation::CW;
    return ScarOrientation::Indeterminate;
}

/// Current u = 2 (Re psi1* psi2, Im psi1* psi2) in w-plane directions (v_F = 1).
struct CurrentField {
    const WaveField* field = nullptr;
    std::vector<double> ux;
    std::vector<double> uy;
};

/// The z-plane current is transported to w-plane directions by the local rotation arg w'(z).
inline CurrentField current(const WaveField& f) {
    CurrentField c;
    c.field = &f;
    c.ux.resize(f.psi1.size());
    c.uy.resize(f.psi1.size());
    for (std::size_t p = 0; p < f.psi1.size(); ++p) {
        const cplx u = 2.0 * std::conj(f.psi1[p]) * f.psi2[p] * f.dir[p];
        c.ux[p] = u.real();
        c.uy[p] = u.imag();
    }
    return c;
}

/// Current in the z-plane frame, before rotation (used for boundary checks in z).
inline cplx current_z(const WaveField& f, std::size_t p) { return 2.0 * std::conj(f.psi1[p]) * f.psi2[p]; }

/// Bilinear interpolation of grid data at a w-plane point (pre-image by Newton iteration).
class FieldSampler {
public:
    FieldSampler(const WaveField& f, const confmap::BilliardShape& shape) : f_(&f), shape_(shape) {}

    std::optional<cplx> preimage(cplx w, cplx guess) const {
        auto z = confmap::inverse_map(shape_, w, guess);
        if (!z) z = confmap::inverse_map(shape_, w, w * shape_.norm());
        if (!z) z = confmap::inverse_map(shape_, w, cplx(0.0, 0.0));
        return z;
    }

    /// Interpolates values[] (grid-sized) at disk point z; radii are clamped to the grid.
    double at_z(const std::vector<double>& values, cplx z) const {
        const auto& g = f_->grid;
        const std::size_t nr = g.n_r(), nt = g.n_theta();
        const double r = std::clamp(std::abs(z), g.r.front(), g.r.back());
        double th = std::arg(z);
        if (th < 0.0) th += 2.0 * std::numbers::pi;
        auto it = std::upper_bound(g.r.begin(), g.r.end(), r);
        std::size_t i1 = static_cast<std::size_t>(std::distance(g.r.begin(), it));
        if (i1 >= nr) i1 = nr - 1;
        if (i1 == 0) i1 = 1;
        const std::size_t i0 = i1 - 1;
        const double tr = (r - g.r[i0]) / (g.r[i1] - g.r[i0]);
        const double jf = th / g.dtheta;
        const auto j0 = static_cast<std::size_t>(std::floor(jf)) % nt;
        const std::size_t j1 = (j0 + 1) % nt;
        const double tt = jf - std::floor(jf);
        auto v = [&](std::size_t i, std::size_t j) { return values[i * nt + j]; };
        return (1 - tr) * ((1 - tt) * v(i0, j0) + tt * v(i0, j1)) + tr * ((1 - tt) * v(i1, j0) + tt * v(i1, j1));
    }

private:
    const WaveField* f_;
    confmap::BilliardShape shape_;
};

struct CirculationResult {
    double circulation = 0.0;  // int u . dl along the stored traversal
    double scale = 0.0;        // mean |u| along the path times the path length
};

/// Line integral of the current along the orbit polygon in its stored traversal direction.
inline CirculationResult circulation(const CurrentField& c, const Orbit& orbit,
                                     const confmap::BilliardShape& shape, double spacing = 0.01) {
    const WaveField& f = *c.field;
    const FieldSampler sampler(f, shape);
    std::vector<double> mag(c.ux.size());
    for (std::size_t p = 0; p < mag.size(); ++p) mag[p] = std::hypot(c.ux[p], c.uy[p]);
    const auto poly = orbit.polygon();
    CirculationResult res;
    double mag_acc = 0.0, len_acc = 0.0;
    cplx guess(0.0, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const cplx a = poly[i], b = poly[(i + 1) % poly.size()];
        const double len = std::abs(b - a);
        const cplx t = (b - a) / len;
        const auto n = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(len / spacing)));
        const double dl = len / static_cast<double>(n);
        for (std::size_t s = 0; s < n; ++s) {
            const cplx w = a + (static_cast<double>(s) + 0.5) * dl * t;
            const auto z = sampler.preimage(w, guess);
            if (!z) continue;
            guess = *z;
            const double ux = sampler.at_z(c.ux, *z), uy = sampler.at_z(c.uy, *z);
            res.circulation += (ux * t.real() + uy * t.imag()) * dl;
            mag_acc += sampler.at_z(mag, *z) * dl;
            len_acc += dl;
        }
    }
    res.scale = len_acc > 0.0 ? mag_acc : 0.0;
    return res;
}

inline constexpr double kNoiseFloor = 0.1;

/// Sign of the circulation along the orbit's CCW traversal; Indeterminate below the noise
/// floor kNoiseFloor * (mean |u| along the orbit) * (orbit length).
inline ScarOrientation orientation(const CurrentField& c, const Orbit& orbit, const confmap::BilliardShape& shape,
                                   double noise_floor = kNoiseFloor) {
    const auto r = circulation(c, orbit, shape);
    if (!(std::abs(r.circulation) >= noise_floor * r.scale) || r.scale == 0.0) return ScarOrientation::Indeterminate;
    const bool along = r.circulation > 0.0;
    const bool ccw = (orbit.orientation == orbits::Orientation::CCW) == along;
    return ccw ? ScarOrientation::CCW : ScarOrientation::CW;
}

/// eta = x - floor(x) with x = |k_n - k_0| / (2 pi / L).
inline double eta(double k_n, double k_0, double L) {
    if (!(L > 0.0)) throw DomainError("eta: L must be positive");
    const double x = std::abs(k_n - k_0) / (2.0 * std::numbers::pi / L);
    double e = x - std::floor(x);
    if (e >= 1.0) e = 0.0;
    return e;
}

/// Gamma = mod(k L / 2 pi, 1).
inline double gamma(double k, double L) {
    if (!(L > 0.0)) throw DomainError("gamma: L must be positive");
    const double x = k * L / (2.0 * std::numbers::pi);
    double g = x - std::floor(x);
    if (g >= 1.0) g = 0.0;
    return g;
}

/// Circular mean of values on [0, 1) (period one); nullopt when the resultant vanishes.
inline std::optional<double> circular_mean(const std::vector<double>& v) {
    cplx acc(0.0, 0.0);
    for (double x : v) acc += std::polar(1.0, 2.0 * std::numbers::pi * x);
    if (v.empty() || std::abs(acc) < 1e-12 * static_cast<double>(v.size())) return std::nullopt;
    double m = std::arg(acc) / (2.0 * std::numbers::pi);
    if (m < 0.0) m += 1.0;
    if (m >= 1.0) m -= 1.0;
    return m;
}

/// Distance between two points of the unit circle R/Z.
inline double circular_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), 1.0);
    return std::min(d, 1.0 - d);
}

struct ScarRecord {
    double alpha = 0.0;
    std::size_t state_index = 0;
    double k = 0.0;
    std::string orbit_label;
    double overlap = 0.0;      // fraction of the |w'|^2-weighted probability inside the tube
    double enhancement = 0.0;  // overlap divided by the uniform baseline tube_area / area
    ScarOrientation orientation = ScarOrientation::Indeterminate;
    double eta = 0.0;
    double gamma = 0.0;
    double circulation = 0.0;  // normalised: circulation / (mean|u| * length)
};

inline constexpr double kDefaultThreshold = 1.25;
inline constexpr double kDefaultDetectTubeFraction = 0.03;
inline constexpr double kDefaultMinCurvatureRadius = 0.1;

struct DetectOptions {
    double threshold = kDefaultThreshold;  // enhancement over the uniform baseline
    spectral::GridSpec grid{160, 512, spectral::RadialSpacing::Gauss, 1e-3};
    double tube_fraction = kDefaultDetectTubeFraction;  // tube width / billiard diameter
    double k_max = spectral::kValidatedKMax;  // only states with k <= k_max
    double noise_floor = kNoiseFloor;
    // Orbits bouncing where the wall's radius of curvature is below this are diffractive at
    // the resolvable wavelengths and are not offered as scar candidates.
    double min_curvature_radius = kDefaultMinCurvatureRadius;
};

/// Tube masks on the reconstruction grid with their weighted areas.
struct TubeMask {
    const Orbit* orbit;
    std::vector<std::uint8_t> inside;
    double baseline = 0.0;  // tube area / billiard area (grid quadrature)
};

inline std::vector<TubeMask> tube_masks(const spectral::Reconstructor& rc, const WaveField& proto,
                                        const std::vector<Orbit>& orbit_list, double width) {
    const auto& g = rc.grid();
    double total = 0.0;
    for (std::size_t i = 0; i < g.n_r(); ++i)
        for (std::size_t j = 0; j < g.n_theta(); ++j) total += proto.jac[proto.at(i, j)] * g.radial_weight[i] * g.dtheta;
    std::vector<TubeMask> masks;
    for (const auto& o : orbit_list) {
        TubeMask m{&o, std::vector<std::uint8_t>(proto.positions_w.size(), 0), 0.0};
        const auto tube = orbits::orbit_tube(o, width);
        double area = 0.0;
        for (std::size_t i = 0; i < g.n_r(); ++i)
            for (std::size_t j = 0; j < g.n_theta(); ++j) {
                const auto p = proto.at(i, j);
                if (tube.contains(proto.positions_w[p])) {
                    m.inside[p] = 1;
                    area += proto.jac[p] * g.radial_weight[i] * g.dtheta;
                }
            }
        m.baseline = area / total;
        masks.push_back(std::move(m));
    }
    return masks;
}

inline double tube_fraction(const WaveField& f, const TubeMask& m) {
    const auto& g = f.grid;
    double in = 0.0, all = 0.0;
    for (std::size_t i = 0; i < g.n_r(); ++i)
        for (std::size_t j = 0; j < g.n_theta(); ++j) {
            const auto p = f.at(i, j);
            const double d = f.density(p) * f.jac[p] * g.radial_weight[i];
            all += d;
            if (m.inside[p]) in += d;
        }
    return all > 0.0 ? in / all : 0.0;
}

/// Assigns eta relative to the lowest-k CW scar of each orbit (lowest scar if none is CW).
inline void assign_eta(std::vector<ScarRecord>& scars, const std::vector<Orbit>& orbit_list) {
    for (const auto& o : orbit_list) {
        double k0 = std::numeric_limits<double>::infinity(), k_any = k0;
        for (const auto& s : scars) {
            if (s.orbit_label != o.label) continue;
            k_any = std::min(k_any, s.k);
            if (s.orientation == ScarOrientation::CW) k0 = std::min(k0, s.k);
        }
        if (!std::isfinite(k0)) k0 = k_any;
        for (auto& s : scars)
            if (s.orbit_label == o.label) s.eta = eta(s.k, k0, o.length);
    }
}

/// States whose tube enhancement over the uniform baseline reaches the threshold, each
/// assigned to its best-matching orbit.
inline std::vector<ScarRecord> detect_scars(const Spectrum& spec, const std::vector<Orbit>& orbit_list,
                                            const DetectOptions& opt = {}) {
    std::vector<ScarRecord> out;
    const auto candidates = orbits::geometric_orbits(spec.shape, orbit_list, opt.min_curvature_radius);
    if (candidates.empty() || spec.n_vectors() == 0) return out;
    const spectral::Reconstructor rc(spec.basis, spec.shape, opt.grid);
    const double width = opt.tube_fraction * orbits::diameter(spec.shape);
    const WaveField proto = rc.field(spec.coeffs.col(0), spec.k[0]);
    const auto masks = tube_masks(rc, proto, candidates, width);
    for (std::size_t n = 0; n < spec.n_vectors(); ++n) {
        if (spec.k[n] > opt.k_max) break;
        const WaveField f = rc.field(spec.coeffs.col(static_cast<Eigen::Index>(n)), spec.k[n]);
        double best = 0.0, best_frac = 0.0;
        const TubeMask* best_mask = nullptr;
        for (const auto& m : masks) {
            if (m.baseline <= 0.0) continue;
            const double frac = tube_fraction(f, m);
            const double e = frac / m.baseline;
            if (e > best) {
                best = e;
                best_frac = frac;
                best_mask = &m;
            }
        }
        if (!best_mask || best < opt.threshold) continue;
        const auto cur = current(f);
        const auto circ = circulation(cur, *best_mask->orbit, spec.shape);
        ScarRecord r;
        r.alpha = spec.alpha;
        r.state_index = n;
        r.k = spec.k[n];
        r.orbit_label = best_mask->orbit->label;
        r.overlap = best_frac;
        r.enhancement = best;
        r.circulation = circ.scale > 0.0 ? circ.circulation / circ.scale : 0.0;
        if (circ.scale > 0.0 && std::abs(circ.circulation) >= opt.noise_floor * circ.scale)
            r.orientation = ((best_mask->orbit->orientation == orbits::Orientation::CCW) == (circ.circulation > 0.0))
                                ? ScarOrientation::CCW
                                : ScarOrientation::CW;
        r.gamma = gamma(r.k, best_mask->orbit->length);
        out.push_back(r);
    }
    assign_eta(out, orbit_list);
    return out;
}

/// CSV: alpha,state_index,k,orbit_label,overlap,orientation,eta,gamma (plus enhancement,
/// circulation).
inline void write_scar_csv(std::ostream& os, const std::vector<ScarRecord>& scars) {
    os << "alpha,state_index,k,orbit_label,overlap,orientation,eta,gamma,enhancement,circulation\n";
    char buf[400];
    for (const auto& s : scars) {
        std::snprintf(buf, sizeof buf, "%.6f,%zu,%.12g,%s,%.9g,%s,%.9g,%.9g,%.9g,%.9g\n", s.alpha, s.state_index, s.k,
                      s.orbit_label.c_str(), s.overlap, to_string(s.orientation).c_str(), s.eta, s.gamma,
                      s.enhancement, s.circulation);
        os << buf;
    }
}

// ---------------------------------------------------------------------------------------
// Flux sweeps

struct TrackPoint {
    double alpha = 0.0;
    double k = 0.0;
    ScarOrientation orientation = ScarOrientation::Indeterminate;
};

struct FluxSweepTrack {
    std::string orbit_label;
    ScarOrientation orientation = ScarOrientation::Indeterminate;
    long n = 0;  // integer level index of the track
    std::vector<TrackPoint> points;
    double fitted_slope = std::numeric_limits<double>::quiet_NaN();
    bool reliable = false;  // at least three points
};

/// Orientation-class summary of a sweep: pooled slope with per-track intercepts and the
/// fractional level phase g = mod(k L / 2pi + W_o alpha, 1).
struct ClassFit {
    ScarOrientation orientation = ScarOrientation::Indeterminate;
    int signed_winding = 0;  // W for CCW, -W for CW
    std::size_t n_points = 0;
    std::size_t n_tracks = 0;
    double slope = std::numeric_limits<double>::quiet_NaN();
    double slope_stderr = std::numeric_limits<double>::quiet_NaN();
    double phase = std::numeric_limits<double>::quiet_NaN();
};

struct SweepSummary {
    std::string orbit_label;
    double length = 0.0;
    int winding = 0;
    std::vector<FluxSweepTrack> tracks;
    ClassFit ccw;
    ClassFit cw;
    ClassFit indeterminate;  // records without orientation, fitted with W = 0
    std::vector<double> crossings;  // alpha in [0, 1) where CCW and CW levels coincide
};

namespace detail {

inline ClassFit fit_class(const std::vector<FluxSweepTrack>& tracks, ScarOrientation o, int signed_w, double L) {
    ClassFit c;
    c.orientation = o;
    c.signed_winding = signed_w;
    // fixed-effects least squares: k = a_track + s * alpha
    double sxx = 0.0, sxy = 0.0;
    std::vector<double> phases;
    std::vector<std::pair<const FluxSweepTrack*, std::pair<double, double>>> means;
    for (const auto& t : tracks) {
        if (t.orientation != o) continue;
        ++c.n_tracks;
        double ma = 0.0, mk = 0.0;
        for (const auto& p : t.points) {
            ma += p.alpha;
            mk += p.k;
            phases.push_back(std::fmod(std::fmod(p.k * L / (2.0 * std::numbers::pi) + signed_w * p.alpha, 1.0) + 1.0, 1.0));
        }
        ma /= static_cast<double>(t.points.size());
        mk /= static_cast<double>(t.points.size());
        for (const auto& p : t.points) {
            sxx += (p.alpha - ma) * (p.alpha - ma);
            sxy += (p.alpha - ma) * (p.k - mk);
        }
        c.n_points += t.points.size();
        means.push_back({&t, {ma, mk}});
    }
    if (sxx > 0.0) {
        c.slope = sxy / sxx;
        double rss = 0.0;
        for (const auto& [t, m] : means)
            for (const auto& p : t->points) {
                const double r = p.k - (m.second + c.slope * (p.alpha - m.first));
                rss += r * r;
            }
        const double dof = static_cast<double>(c.n_points) - static_cast<double>(c.n_tracks) - 1.0;
        if (dof > 0.0) c.slope_stderr = std::sqrt(rss / dof / sxx);
    }
    if (auto m = circular_mean(phases)) c.phase = *m;
    return c;
}

}  // namespace detail

/// Groups the scar records of one orbit over a flux sweep into level tracks.
/// Records of orientation o are assigned the level index n = round(k L/2pi + W_o alpha - g_o)
/// where g_o is the circular mean phase of the class (the slope prior -W_o 2pi/L); each
/// (orientation, n) group is one track. Records without orientation form a third class with
/// W_o = 0. Crossings follow from the two oriented class phases.
inline SweepSummary track_flux_sweep(const std::vector<std::pair<double, std::vector<ScarRecord>>>& runs,
                                     const Orbit& orbit) {
    SweepSummary sum;
    sum.orbit_label = orbit.label;
    sum.length = orbit.length;
    sum.winding = orbit.winding;
    const double L = orbit.length;
    const double two_pi = 2.0 * std::numbers::pi;
    for (ScarOrientation o : {ScarOrientation::CCW, ScarOrientation::CW, ScarOrientation::Indeterminate}) {
        const int sw = o == ScarOrientation::CCW ? orbit.winding : (o == ScarOrientation::CW ? -orbit.winding : 0);
        std::vector<TrackPoint> pts;
        for (const auto& [alpha, recs] : runs)
            for (const auto& r : recs)
                if (r.orbit_label == orbit.label && r.orientation == o) pts.push_back({alpha, r.k, o});
        if (pts.empty()) continue;
        std::vector<double> phases;
        for (const auto& p : pts) phases.push_back(std::fmod(std::fmod(p.k * L / two_pi + sw * p.alpha, 1.0) + 1.0, 1.0));
        const double g0 = circular_mean(phases).value_or(0.0);
        std::map<long, FluxSweepTrack> by_n;
        for (const auto& p : pts) {
            const long n = std::lround(p.k * L / two_pi + sw * p.alpha - g0);
            auto& t = by_n[n];
            t.orbit_label = orbit.label;
            t.orientation = o;
            t.n = n;
            t.points.push_back(p);
        }
        for (auto& [n, t] : by_n) {
            std::sort(t.points.begin(), t.points.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
            t.reliable = t.points.size() >= 3;
            if (t.points.size() >= 2) {
                double ma = 0.0, mk = 0.0;
                for (const auto& p : t.points) {
                    ma += p.alpha;
                    mk += p.k;
                }
                ma /= static_cast<double>(t.points.size());
                mk /= static_cast<double>(t.points.size());
                double sxx = 0.0, sxy = 0.0;
                for (const auto& p : t.points) {
                    sxx += (p.alpha - ma) * (p.alpha - ma);
                    sxy += (p.alpha - ma) * (p.k - mk);
                }
                if (sxx > 0.0) t.fitted_slope = sxy / sxx;
            }
            sum.tracks.push_back(t);
        }
        auto fit = detail::fit_class(sum.tracks, o, sw, L);
        (o == ScarOrientation::CCW ? sum.ccw : (o == ScarOrientation::CW ? sum.cw : sum.indeterminate)) = fit;
    }
    // levels coincide when n + g_+ - W alpha = m + g_- + W alpha  =>  alpha = (g_+ - g_- + j) / 2W
    if (orbit.winding != 0 && std::isfinite(sum.ccw.phase) && std::isfinite(sum.cw.phase)) {
        const int two_w = 2 * std::abs(orbit.winding);
        const double d = orbit.winding > 0 ? sum.ccw.phase - sum.cw.phase : sum.cw.phase - sum.ccw.phase;
        for (int j = -two_w - 1; j <= two_w + 1; ++j) {
            const double a = (d + j) / two_w;
            if (a >= 0.0 && a < 1.0) sum.crossings.push_back(a);
        }
        std::sort(sum.crossings.begin(), sum.crossings.end());
    }
    return sum;
}

inline nlohmann::json to_json(const SweepSummary& s) {
    auto cls = [](const ClassFit& c) {
        return nlohmann::json{{"orientation", to_string(c.orientation)}, {"signed_winding", c.signed_winding},
                              {"n_points", c.n_points},                  {"n_tracks", c.n_tracks},
                              {"slope", std::isfinite(c.slope) ? nlohmann::json(c.slope) : nlohmann::json()},
                              {"slope_stderr", std::isfinite(c.slope_stderr) ? nlohmann::json(c.slope_stderr) : nlohmann::json()},
                              {"phase", std::isfinite(c.phase) ? nlohmann::json(c.phase) : nlohmann::json()}};
    };
    nlohmann::json tracks = nlohmann::json::array();
    for (const auto& t : s.tracks) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : t.points) pts.push_back({p.alpha, p.k});
        tracks.push_back({{"orientation", to_string(t.orientation)},
                          {"n", t.n},
                          {"points", pts},
                          {"fitted_slope", std::isfinite(t.fitted_slope) ? nlohmann::json(t.fitted_slope) : nlohmann::json()},
                          {"reliable", t.reliable}});
    }
    return {{"orbit_label", s.orbit_label},
            {"L", s.length},
            {"W", s.winding},
            {"predicted_slope_ccw", -s.winding * 2.0 * std::numbers::pi / s.length},
            {"ccw", cls(s.ccw)},
            {"cw", cls(s.cw)},
            {"indeterminate", cls(s.indeterminate)},
            {"crossings", s.crossings},
            {"tracks", tracks}};
}

}  // namespace diracscar::scars
