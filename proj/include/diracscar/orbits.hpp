#pragma once

// Periodic orbits of the billiard as critical points of the Birkhoff chord-length function
// L(phi_1, ..., phi_N) = sum |w(e^{i phi_{j+1}}) - w(e^{i phi_j})| over disk angles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/sobol.hpp>
#include <json.hpp>

#include "diracscar/confmap.hpp"
#include "diracscar/errors.hpp"

namespace diracscar::orbits {

using cplx = std::complex<double>;
using confmap::BilliardShape;
using confmap::BoundaryPoint;

enum class Orientation { CCW, CW };

inline std::string to_string(Orientation o) { return o == Orientation::CCW ? "CCW" : "CW"; }
inline Orientation flipped(Orientation o) { return o == Orientation::CCW ? Orientation::CW : Orientation::CCW; }

inline constexpr double kSpecularityTolerance = 1e-8;
inline constexpr double kClosureTolerance = 1e-8;
inline constexpr double kFluxChordTolerance = 1e-9;
inline constexpr double kZeroAreaTolerance = 1e-10;

struct Orbit {
    std::vector<BoundaryPoint> vertices;
    double length = 0.0;
    int bounces = 0;
    int winding = 0;
    int maslov = 0;
    std::string label;
    Orientation orientation = Orientation::CCW;
    bool winding_degenerate = false;  // a chord passes through the flux point
    double signed_area = 0.0;         // shoelace area of the vertex polygon
    double specularity_residual = 0.0;

    std::vector<cplx> polygon() const {
        std::vector<cplx> p;
        p.reserve(vertices.size());
        for (const auto& v : vertices) p.push_back(v.position);
        return p;
    }
};

namespace detail {

inline double wrap_pi(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a > std::numbers::pi) a -= two_pi;
    if (a <= -std::numbers::pi) a += two_pi;
    return a;
}

inline double dot(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

inline double segment_distance(cplx p, cplx a, cplx b) {
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

inline double shoelace(const std::vector<cplx>& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const cplx a = p[i], b = p[(i + 1) % p.size()];
        acc += a.real() * b.imag() - b.real() * a.imag();
    }
    return 0.5 * acc;
}

/// Point-in-polygon by the winding rule.
inline bool inside(const std::vector<cplx>& poly, cplx q) {
    int wn = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = poly[i], b = poly[(i + 1) % n];
        const double cross = (b.real() - a.real()) * (q.imag() - a.imag()) -
                             (q.real() - a.real()) * (b.imag() - a.imag());
        if (a.imag() <= q.imag()) {
            if (b.imag() > q.imag() && cross > 0.0) ++wn;
        } else if (b.imag() <= q.imag() && cross < 0.0) {
            --wn;
        }
    }
    return wn != 0;
}

struct LengthFunction {
    const BilliardShape* shape;

    cplx point(double phi) const { return confmap::map(*shape, std::polar(1.0, phi)); }
    cplx tangent(double phi) const {
        const cplx z = std::polar(1.0, phi);
        return cplx(0.0, 1.0) * z * confmap::derivative(*shape, z);
    }

    double value(const Eigen::VectorXd& phi) const {
        const auto n = phi.size();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) acc += std::abs(point(phi((i + 1) % n)) - point(phi(i)));
        return acc;
    }

    /// dL/dphi_i = T_i . (e_{i-1,i} - e_{i,i+1}) with e the unit chord directions.
    Eigen::VectorXd gradient(const Eigen::VectorXd& phi) const {
        const auto n = phi.size();
        std::vector<cplx> p(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = point(phi(i));
        Eigen::VectorXd g(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const cplx prev = p[static_cast<std::size_t>((i + n - 1) % n)];
            const cplx next = p[static_cast<std::size_t>((i + 1) % n)];
            const cplx ein = p[ui] - prev, eout = next - p[ui];
            const double din = std::abs(ein), dout = std::abs(eout);
            if (din == 0.0 || dout == 0.0) {
                g(i) = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            g(i) = dot(tangent(phi(i)), ein / din - eout / dout);
        }
        return g;
    }

    Eigen::MatrixXd hessian(const Eigen::VectorXd& phi) const {
        const auto n = phi.size();
        const double h = 1e-6;
        Eigen::MatrixXd H(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::VectorXd a = phi, b = phi;
            a(j) += h;
            b(j) -= h;
            H.col(j) = (gradient(a) - gradient(b)) / (2.0 * h);
        }
        return 0.5 * (H + H.transpose());
    }
};

}  // namespace detail

/// Largest angular deviation from the reflection law over all vertices, in radians.
inline double specularity_residual(const std::vector<BoundaryPoint>& v) {
    const std::size_t n = v.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx prev = v[(i + n - 1) % n].position, cur = v[i].position, next = v[(i + 1) % n].position;
        const cplx din = (cur - prev) / std::abs(cur - prev);
        const cplx dout = (next - cur) / std::abs(next - cur);
        const cplx nrm = std::polar(1.0, v[i].normal_angle);
        const cplx refl = din - 2.0 * detail::dot(din, nrm) * nrm;
        worst = std::max(worst, std::abs(std::arg(dout / refl)));
    }
    return worst;
}

struct WindingResult {
    int winding = 0;
    bool degenerate = false;
};

/// Signed number of turns of the closed vertex polygon about the origin (the flux point).
inline WindingResult winding_number(const std::vector<cplx>& poly) {
    const std::size_t n = poly.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = poly[i], b = poly[(i + 1) % n];
        if (detail::segment_distance(cplx(0.0, 0.0), a, b) < kFluxChordTolerance) return {0, true};
        total += std::arg(b / a);
    }
    return {static_cast<int>(std::lround(total / (2.0 * std::numbers::pi))), false};
}

inline WindingResult winding_number(const Orbit& o) { return winding_number(o.polygon()); }

/// Orbit traversed in the opposite direction (same first vertex).
inline Orbit reversed(const Orbit& o) {
    Orbit r = o;
    std::reverse(r.vertices.begin() + 1, r.vertices.end());
    r.orientation = flipped(o.orientation);
    r.winding = -o.winding;
    r.signed_area = -o.signed_area;
    return r;
}

/// Fills length, winding, area and residual from the vertex list.
inline void finalize(Orbit& o) {
    const auto p = o.polygon();
    o.bounces = static_cast<int>(p.size());
    o.maslov = o.bounces;
    o.length = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) o.length += std::abs(p[(i + 1) % p.size()] - p[i]);
    const auto w = winding_number(p);
    o.winding = w.winding;
    o.winding_degenerate = w.degenerate;
    o.signed_area = detail::shoelace(p);
    o.specularity_residual = specularity_residual(o.vertices);
}

/// Canonical form: CCW traversal (positive shoelace area; zero-area orbits take the
/// direction whose second vertex has the smaller disk angle) starting from the vertex with
/// the smallest disk angle in [0, 2pi).
inline Orbit canonical(Orbit o) {
    const double two_pi = 2.0 * std::numbers::pi;
    auto key = [&](const BoundaryPoint& v) {
        double a = std::fmod(v.phi, two_pi);
        return a < 0.0 ? a + two_pi : a;
    };
    auto start = std::min_element(o.vertices.begin(), o.vertices.end(),
                                  [&](const auto& a, const auto& b) { return key(a) < key(b); });
    std::rotate(o.vertices.begin(), start, o.vertices.end());
    finalize(o);
    bool flip = o.signed_area < -kZeroAreaTolerance;
    if (std::abs(o.signed_area) <= kZeroAreaTolerance && o.vertices.size() > 2)
        flip = key(o.vertices.back()) < key(o.vertices[1]);
    if (flip) {
        std::reverse(o.vertices.begin() + 1, o.vertices.end());
        finalize(o);
    }
    o.orientation = Orientation::CCW;
    return o;
}

struct SearchOptions {
    std::size_t n_seeds = 512;
    int max_iterations = 80;
    double gradient_tolerance = 1e-12;
    double max_step = 0.25;
    std::size_t boundary_resolution = 2048;  // polygon used for the chord-inside test
};

struct SearchReport {
    std::size_t converged = 0;
    std::size_t collisions = 0;  // seeds whose vertices merged
    std::size_t rejected = 0;    // chords leaving the domain, repeats, non-convergence
};

namespace detail {

inline bool repeats_shorter(const std::vector<cplx>& p) {
    const std::size_t n = p.size();
    for (std::size_t d = 1; d < n; ++d) {
        if (n % d != 0) continue;
        bool same = true;
        for (std::size_t i = 0; i < n && same; ++i) same = std::abs(p[(i + d) % n] - p[i]) < 1e-6;
        if (same) return true;
    }
    return false;
}

inline bool same_orbit(const Orbit& a, const Orbit& b) {
    if (a.bounces != b.bounces || std::abs(a.length - b.length) > 1e-7) return false;
    for (const auto& va : a.vertices) {
        bool hit = false;
        for (const auto& vb : b.vertices) hit = hit || std::abs(va.position - vb.position) < 1e-6;
        if (!hit) return false;
    }
    return true;
}

inline bool chords_inside(const std::vector<cplx>& p, const std::vector<cplx>& boundary_poly,
                          const std::vector<double>& normals) {
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = p[i], b = p[(i + 1) % n];
        // leave each vertex inward
        if (dot(b - a, std::polar(1.0, normals[i])) >= 0.0) return false;
        if (dot(a - b, std::polar(1.0, normals[(i + 1) % n])) >= 0.0) return false;
        for (int k = 1; k < 64; ++k) {
            const double t = static_cast<double>(k) / 64.0;
            if (!inside(boundary_poly, a + t * (b - a))) return false;
        }
    }
    return true;
}

inline std::string roman(int n) {
    static const std::pair<int, const char*> table[] = {{100, "C"}, {90, "XC"}, {50, "L"}, {40, "XL"},
                                                        {10, "X"},  {9, "IX"},  {5, "V"},  {4, "IV"},
                                                        {1, "I"}};
    if (n < 1 || n > 399) return std::to_string(n);
    std::string out;
    for (const auto& [v, s] : table)
        while (n >= v) {
            out += s;
            n -= v;
        }
    return out;
}

}  // namespace detail

/// Diameter of the billiard (max distance between boundary samples).
inline double diameter(const BilliardShape& s, std::size_t n = 720) {
    std::vector<cplx> p(n);
    for (std::size_t i = 0; i < n; ++i)
        p[i] = confmap::map(s, std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n)));
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d = std::max(d, std::abs(p[i] - p[j]));
    return d;
}

/// Newton iteration on grad L = 0 from one seed.
inline std::optional<Eigen::VectorXd> refine_orbit(const BilliardShape& shape, Eigen::VectorXd phi,
                                                   const SearchOptions& opt) {
    const detail::LengthFunction lf{&shape};
    for (int it = 0; it < opt.max_iterations; ++it) {
        const Eigen::VectorXd g = lf.gradient(phi);
        if (!g.allFinite()) return std::nullopt;
        if (g.cwiseAbs().maxCoeff() < opt.gradient_tolerance) return phi;
        const Eigen::MatrixXd H = lf.hessian(phi);
        Eigen::VectorXd step = H.completeOrthogonalDecomposition().solve(g);
        if (!step.allFinite()) return std::nullopt;
        const double m = step.cwiseAbs().maxCoeff();
        if (m > opt.max_step) step *= opt.max_step / m;
        phi -= step;
        if (m < 1e-15) break;
    }
    const Eigen::VectorXd g = lf.gradient(phi);
    if (g.allFinite() && g.cwiseAbs().maxCoeff() < 1e3 * opt.gradient_tolerance) return phi;
    return std::nullopt;
}

/// Labels orbits of equal bounce count in increasing length: "period-N" when unique,
/// otherwise "period-N-I", "period-N-II", ...
inline void assign_labels(std::vector<Orbit>& orbits) {
    std::stable_sort(orbits.begin(), orbits.end(), [](const Orbit& a, const Orbit& b) {
        return a.bounces != b.bounces ? a.bounces < b.bounces : a.length < b.length;
    });
    for (std::size_t i = 0; i < orbits.size();) {
        std::size_t j = i;
        while (j < orbits.size() && orbits[j].bounces == orbits[i].bounces) ++j;
        for (std::size_t k = i; k < j; ++k) {
            orbits[k].label = "period-" + std::to_string(orbits[k].bounces);
            if (j - i > 1) orbits[k].label += "-" + detail::roman(static_cast<int>(k - i + 1));
        }
        i = j;
    }
}

/// Periodic orbits with exactly n_bounces reflections, in canonical CCW form.
inline std::vector<Orbit> find_orbits(const BilliardShape& shape, int n_bounces, std::size_t n_seeds,
                                      SearchReport* report = nullptr, SearchOptions opt = {}) {
    if (n_bounces < 2) throw DomainError("find_orbits: need at least two bounces");
    opt.n_seeds = n_seeds;
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<cplx> bpoly(opt.boundary_resolution);
    for (std::size_t i = 0; i < bpoly.size(); ++i)
        bpoly[i] = confmap::map(shape, std::polar(1.0, two_pi * static_cast<double>(i) / static_cast<double>(bpoly.size())));
    const double min_chord = 1e-3 * diameter(shape);

    boost::random::sobol qrng(static_cast<std::size_t>(n_bounces));
    const double scale = 1.0 / (static_cast<double>(qrng.max()) + 1.0);
    SearchReport rep;
    std::vector<Orbit> found;
    for (std::size_t s = 0; s < opt.n_seeds; ++s) {
        Eigen::VectorXd phi(n_bounces);
        for (int i = 0; i < n_bounces; ++i) phi(i) = two_pi * static_cast<double>(qrng()) * scale;
        const auto sol = refine_orbit(shape, phi, opt);
        if (!sol) {
            ++rep.rejected;
            continue;
        }
        Orbit o;
        std::vector<cplx> p;
        std::vector<double> normals;
        for (int i = 0; i < n_bounces; ++i) {
            double a = std::fmod((*sol)(i), two_pi);
            if (a < 0.0) a += two_pi;
            o.vertices.push_back(confmap::boundary_point(shape, a));
            p.push_back(o.vertices.back().position);
            normals.push_back(o.vertices.back().normal_angle);
        }
        bool collide = false;
        for (std::size_t i = 0; i < p.size(); ++i) collide = collide || std::abs(p[(i + 1) % p.size()] - p[i]) < min_chord;
        if (collide) {
            ++rep.collisions;
            continue;
        }
        if (detail::repeats_shorter(p) || !detail::chords_inside(p, bpoly, normals)) {
            ++rep.rejected;
            continue;
        }
        o = canonical(std::move(o));
        if (o.specularity_residual > kSpecularityTolerance) {
            ++rep.rejected;
            continue;
        }
        ++rep.converged;
        bool dup = false;
        for (const auto& f : found) dup = dup || detail::same_orbit(f, o);
        if (!dup) found.push_back(std::move(o));
    }
    assign_labels(found);
    if (report) *report = rep;
    return found;
}

/// All orbits with 2..max_bounces reflections, labelled.
inline std::vector<Orbit> find_catalog(const BilliardShape& shape, int max_bounces, std::size_t n_seeds) {
    std::vector<Orbit> all;
    for (int n = 2; n <= max_bounces; ++n) {
        auto part = find_orbits(shape, n, n_seeds);
        all.insert(all.end(), part.begin(), part.end());
    }
    assign_labels(all);
    return all;
}

/// Smallest |radius of curvature| over the bounce points. Reflections off boundary features
/// much smaller than a wavelength are diffractive rather than specular.
inline double min_curvature_radius(const BilliardShape& shape, const Orbit& o) {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& v : o.vertices) r = std::min(r, std::abs(confmap::curvature_radius(shape, v.phi)));
    return r;
}

/// Orbits whose every bounce point has curvature radius at least `min_radius`.
inline std::vector<Orbit> geometric_orbits(const BilliardShape& shape, const std::vector<Orbit>& all,
                                           double min_radius) {
    std::vector<Orbit> out;
    for (const auto& o : all)
        if (min_curvature_radius(shape, o) >= min_radius) out.push_back(o);
    return out;
}

/// Indicator of the width-neighbourhood of the orbit polygon.
class OrbitTube {
public:
    OrbitTube(const Orbit& o, double width) : poly_(o.polygon()), width_(width) {
        if (!(width > 0.0)) throw DomainError("orbit_tube: width must be positive");
    }
    double distance(cplx w) const {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < poly_.size(); ++i)
            d = std::min(d, detail::segment_distance(w, poly_[i], poly_[(i + 1) % poly_.size()]));
        return d;
    }
    bool contains(cplx w) const { return distance(w) <= width_; }
    int operator()(cplx w) const { return contains(w) ? 1 : 0; }
    double width() const noexcept { return width_; }

private:
    std::vector<cplx> poly_;
    double width_;
};

inline OrbitTube orbit_tube(const Orbit& o, double width) { return {o, width}; }

inline constexpr double kDefaultTubeFraction = 0.05;

inline nlohmann::json to_json(const Orbit& o) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& p : o.vertices)
        v.push_back({{"phi", p.phi}, {"s", p.s}, {"u", p.position.real()}, {"v", p.position.imag()},
                     {"normal_angle", p.normal_angle}});
    return {{"label", o.label},
            {"vertices", v},
            {"L", o.length},
            {"N", o.bounces},
            {"W", o.winding},
            {"sigma", o.maslov},
            {"orientation", to_string(o.orientation)},
            {"winding_degenerate", o.winding_degenerate},
            {"signed_area", o.signed_area},
            {"specularity_residual", o.specularity_residual}};
}

inline Orbit orbit_from_json(const nlohmann::json& j) {
    Orbit o;
    for (const auto& v : j.at("vertices"))
        o.vertices.push_back({v.at("phi").get<double>(), v.at("s").get<double>(),
                              cplx(v.at("u").get<double>(), v.at("v").get<double>()),
                              v.at("normal_angle").get<double>()});
    finalize(o);
    o.label = j.at("label").get<std::string>();
    o.orientation = j.at("orientation").get<std::string>() == "CW" ? Orientation::CW : Orientation::CCW;
    return o;
}

inline nlohmann::json catalog_json(const std::vector<Orbit>& orbits) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& o : orbits) arr.push_back(to_json(o));
    return arr;
}

/// CSV polylines: label,index,u,v (closed: first vertex repeated at the end).
inline void write_polylines_csv(std::ostream& os, const std::vector<Orbit>& orbits) {
    os << "label,index,u,v\n";
    char buf[200];
    for (const auto& o : orbits) {
        for (std::size_t i = 0; i <= o.vertices.size(); ++i) {
            const auto& p = o.vertices[i % o.vertices.size()].position;
            std::snprintf(buf, sizeof buf, "%s,%zu,%.15g,%.15g\n", o.label.c_str(), i, p.real(), p.imag());
            os << buf;
        }
    }
}

}  // namespace diracscar::orbits
