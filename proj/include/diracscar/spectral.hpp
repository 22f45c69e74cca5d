#pragma once

// Galerkin assembly of the weighted overlap matrix on the disk basis, its Hermitian
// eigendecomposition, and reconstruction of spinor fields on polar grids.

#include <algorithm>
#include <cmath>
#include <complex>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>
#include <lapacke.h>

#include "diracscar/confmap.hpp"
#include "diracscar/diskbasis.hpp"
#include "diracscar/errors.hpp"
#include "diracscar/quadrature.hpp"

namespace diracscar::spectral {

using cplx = std::complex<double>;
using diskbasis::Basis;
using diskbasis::BasisIndex;
using diskbasis::BasisMode;
using confmap::BilliardShape;

/// Radial Gauss-Legendre order for matrix elements.
inline constexpr std::size_t kRadialQuadratureOrder = 256;
inline constexpr double kHermiticityTolerance = 1e-12;

/// Closed-form angular integral of |w'(r e^{i theta})|^2 e^{i(l'-l) theta}, including the
/// 1/norm^2 factor of the map. Zero for |l - l'| > 2.
inline cplx angular_integral(const BilliardShape& s, int l, int l_prime, double r) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double inv_n2 = 1.0 / (s.norm() * s.norm());
    const double b = s.b(), c = s.c();
    const int d = l - l_prime;
    const cplx e = std::polar(1.0, s.delta());
    switch (d) {
        case 0: return two_pi * (1.0 + 4.0 * b * b * r * r + 9.0 * c * c * r * r * r * r) * inv_n2;
        case 1: return two_pi * (2.0 * b * r + 6.0 * b * c * r * r * r * e) * inv_n2;
        case -1: return two_pi * (2.0 * b * r + 6.0 * b * c * r * r * r * std::conj(e)) * inv_n2;
        case 2: return two_pi * (3.0 * c * r * r * e) * inv_n2;
        case -2: return two_pi * (3.0 * c * r * r * std::conj(e)) * inv_n2;
        default: return {0.0, 0.0};
    }
}

/// Normalised radial components N*phi, N*chi of every mode at a fixed set of radii,
/// stored per angular channel as (n_radii x m_max) blocks.
struct RadialTable {
    std::vector<double> radii;
    int l_min = 0;
    int m_max = 0;
    std::vector<Eigen::MatrixXd> phi;  // index l - l_min
    std::vector<Eigen::MatrixXd> chi;

    RadialTable() = default;
    RadialTable(const Basis& basis, std::vector<double> r) : radii(std::move(r)) {
        l_min = basis.l_min;
        m_max = basis.m_max;
        const int n_l = basis.l_max - basis.l_min + 1;
        const auto n_r = static_cast<Eigen::Index>(radii.size());
        phi.assign(static_cast<std::size_t>(n_l), Eigen::MatrixXd(n_r, m_max));
        chi.assign(static_cast<std::size_t>(n_l), Eigen::MatrixXd(n_r, m_max));
        for (const auto& md : basis.modes) {
            const auto li = static_cast<std::size_t>(md.index.l - l_min);
            const int mi = md.index.m - 1;
            for (Eigen::Index i = 0; i < n_r; ++i) {
                const auto v = diskbasis::radial_values(md.nu, md.regime,
                                                        md.mu * radii[static_cast<std::size_t>(i)]);
                phi[li](i, mi) = md.norm * v.phi;
                chi[li](i, mi) = md.norm * v.chi;
            }
        }
    }
};

struct CouplingMatrix {
    Eigen::Index dim = 0;
    Eigen::MatrixXcd entries;
    std::vector<BasisIndex> basis_order;
    double hermiticity_residual = 0.0;  // max|M - M^dagger| / max|M| before symmetrisation
};

/// Position of mode (l, m) in the basis ordering (l-major, then m).
inline Eigen::Index flat_index(const Basis& b, int l, int m) {
    return static_cast<Eigen::Index>(l - b.l_min) * b.m_max + (m - 1);
}

/// M_{lm,l'm'} = N N' / (mu mu') int_0^1 r [phi phi' + chi chi'] I(l, l', r) dr.
/// Blocks are computed independently on both sides of the diagonal; the Hermiticity
/// residual is checked before the matrix is symmetrised.
inline CouplingMatrix assemble(const Basis& basis, const BilliardShape& shape,
                               std::size_t radial_order = kRadialQuadratureOrder) {
    const auto rule = quadrature::radial_area_rule(radial_order);
    const RadialTable table(basis, rule.nodes);
    const int n_l = basis.l_max - basis.l_min + 1;
    const int mm = basis.m_max;
    const auto dim = static_cast<Eigen::Index>(basis.size());
    if (dim != static_cast<Eigen::Index>(n_l) * mm) throw NumericError("assemble: basis is not rectangular");

    // 1/mu scaling folded into the tables
    std::vector<Eigen::MatrixXd> phi_s(table.phi), chi_s(table.chi);
    for (const auto& md : basis.modes) {
        const auto li = static_cast<std::size_t>(md.index.l - basis.l_min);
        phi_s[li].col(md.index.m - 1) /= md.mu;
        chi_s[li].col(md.index.m - 1) /= md.mu;
    }
    const auto n_r = static_cast<Eigen::Index>(rule.size());
    Eigen::VectorXd w(n_r), r(n_r);
    for (Eigen::Index i = 0; i < n_r; ++i) {
        w(i) = rule.weights[static_cast<std::size_t>(i)];
        r(i) = rule.nodes[static_cast<std::size_t>(i)];
    }
    // radial moments: sum_i w_i r_i^p [phi_a phi_b + chi_a chi_b]
    auto moment = [&](int la, int lb, int p) {
        Eigen::VectorXd wp = w;
        for (int k = 0; k < p; ++k) wp = wp.cwiseProduct(r);
        const auto& pa = phi_s[static_cast<std::size_t>(la)];
        const auto& pb = phi_s[static_cast<std::size_t>(lb)];
        const auto& ca = chi_s[static_cast<std::size_t>(la)];
        const auto& cb = chi_s[static_cast<std::size_t>(lb)];
        Eigen::MatrixXd out = pa.transpose() * wp.asDiagonal() * pb;
        out.noalias() += ca.transpose() * wp.asDiagonal() * cb;
        return out;
    };

    CouplingMatrix M;
    M.dim = dim;
    M.entries = Eigen::MatrixXcd::Zero(dim, dim);
    M.basis_order.reserve(basis.size());
    for (const auto& md : basis.modes) M.basis_order.push_back(md.index);

    const double two_pi = 2.0 * std::numbers::pi;
    const double inv_n2 = 1.0 / (shape.norm() * shape.norm());
    const double b = shape.b(), c = shape.c();
    const cplx e = std::polar(1.0, shape.delta());
    for (int la = 0; la < n_l; ++la) {
        for (int lb = std::max(0, la - 2); lb <= std::min(n_l - 1, la + 2); ++lb) {
            const int d = la - lb;  // l - l'
            Eigen::MatrixXcd blk;
            if (d == 0) {
                Eigen::MatrixXd acc = moment(la, lb, 0);
                if (b != 0.0) acc += 4.0 * b * b * moment(la, lb, 2);
                if (c != 0.0) acc += 9.0 * c * c * moment(la, lb, 4);
                blk = (two_pi * inv_n2 * acc).cast<cplx>();
            } else if (std::abs(d) == 1) {
                if (b == 0.0) continue;
                const cplx ph = d > 0 ? e : std::conj(e);
                blk = (two_pi * inv_n2 * 2.0 * b * moment(la, lb, 1)).cast<cplx>();
                if (c != 0.0) blk += (two_pi * inv_n2 * 6.0 * b * c * ph) * moment(la, lb, 3).cast<cplx>();
            } else {
                if (c == 0.0) continue;
                const cplx ph = d > 0 ? e : std::conj(e);
                blk = (two_pi * inv_n2 * 3.0 * c * ph) * moment(la, lb, 2).cast<cplx>();
            }
            M.entries.block(static_cast<Eigen::Index>(la) * mm, static_cast<Eigen::Index>(lb) * mm, mm, mm) = blk;
        }
    }
    const double scale = M.entries.cwiseAbs().maxCoeff();
    const double resid = (M.entries - M.entries.adjoint()).cwiseAbs().maxCoeff();
    M.hermiticity_residual = scale > 0.0 ? resid / scale : 0.0;
    if (M.hermiticity_residual > kHermiticityTolerance) {
        std::ostringstream os;
        os << "assemble: Hermiticity residual " << M.hermiticity_residual << " exceeds tolerance";
        throw NumericError(os.str());
    }
    M.entries = 0.5 * (M.entries + M.entries.adjoint()).eval();
    return M;
}

/// Default truncation and the wavevector window in which it is converged: growing the
/// basis to (l_max + 8, m_max + 4) moves no level below kValidatedKMax by more than 1e-4.
struct Truncation {
    int l_max = 72;
    int m_max = 28;
};
inline constexpr double kValidatedKMax = 40.0;

struct Spectrum {
    std::vector<double> k;            // ascending, all positive eigenvalues
    Eigen::MatrixXcd coeffs;          // dim x n_vectors; column n is c_{n,lm} (unit |w'|^2 norm)
    double alpha = 0.0;
    BilliardShape shape = BilliardShape::disk();
    Basis basis;
    std::size_t discarded = 0;        // eigenvalues <= 0 dropped as truncation artifacts

    std::size_t n_states() const noexcept { return k.size(); }
    std::size_t n_vectors() const noexcept { return static_cast<std::size_t>(coeffs.cols()); }
};

struct SolveOptions {
    /// Keep coefficient vectors only for the lowest this-many states (0 = all).
    std::size_t max_vectors = 0;
};

/// Full Hermitian eigendecomposition M V = lambda V; k = 1/sqrt(lambda), c = V/mu rescaled
/// so that sum c* c' <psi|w'^2|psi'> = 1 (which is a factor k).
inline Spectrum solve(const CouplingMatrix& M, const Basis& basis, const BilliardShape& shape,
                      const SolveOptions& opt = {}) {
    const auto n = M.dim;
    Eigen::MatrixXcd a = M.entries;  // column-major, overwritten
    std::vector<double> w(static_cast<std::size_t>(n));
    Eigen::MatrixXcd z(n, n);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_zheevr(
        LAPACK_COL_MAJOR, 'V', 'A', 'L', static_cast<lapack_int>(n),
        reinterpret_cast<lapack_complex_double*>(a.data()), static_cast<lapack_int>(n), 0.0, 0.0, 0, 0,
        0.0, &found, w.data(), reinterpret_cast<lapack_complex_double*>(z.data()),
        static_cast<lapack_int>(n), isuppz.data());
    if (info != 0) {
        std::ostringstream os;
        os << "solve: zheevr failed with info=" << info;
        throw NumericError(os.str());
    }
    Spectrum sp;
    sp.alpha = basis.alpha;
    sp.shape = shape;
    sp.basis = basis;
    // LAPACK returns ascending lambda; largest lambda is the lowest k
    std::vector<Eigen::Index> order;
    for (Eigen::Index j = found - 1; j >= 0; --j) {
        if (w[static_cast<std::size_t>(j)] > 0.0) order.push_back(j);
        else ++sp.discarded;
    }
    sp.k.reserve(order.size());
    for (auto j : order) sp.k.push_back(1.0 / std::sqrt(w[static_cast<std::size_t>(j)]));
    const std::size_t keep = opt.max_vectors == 0 ? order.size() : std::min(order.size(), opt.max_vectors);
    sp.coeffs.resize(n, static_cast<Eigen::Index>(keep));
    for (std::size_t s = 0; s < keep; ++s) {
        const auto j = order[s];
        const double kn = sp.k[s];
        for (Eigen::Index i = 0; i < n; ++i) {
            sp.coeffs(i, static_cast<Eigen::Index>(s)) = z(i, j) / basis.modes[static_cast<std::size_t>(i)].mu * kn;
        }
    }
    return sp;
}

/// Convenience: basis -> matrix -> spectrum.
inline Spectrum compute_spectrum(const BilliardShape& shape, double alpha, Truncation tr,
                                 const SolveOptions& opt = {}) {
    auto basis = diskbasis::build_basis(diskbasis::FluxParameter(alpha), tr.l_max, tr.m_max);
    auto M = assemble(basis, shape);
    return solve(M, basis, shape, opt);
}

// ---------------------------------------------------------------------------------------
// Reconstruction

enum class RadialSpacing { Gauss, Uniform };

struct GridSpec {
    std::size_t n_r = 400;
    std::size_t n_theta = 400;
    RadialSpacing spacing = RadialSpacing::Uniform;
    double r_min = 1e-3;  // uniform grids only; r < 1e-3 is not resolved
};

/// Polar mesh on the unit disk with quadrature weights for int f r dr d theta.
struct PolarGrid {
    std::vector<double> r;
    std::vector<double> theta;
    std::vector<double> radial_weight;  // includes the factor r
    double dtheta = 0.0;

    std::size_t n_r() const noexcept { return r.size(); }
    std::size_t n_theta() const noexcept { return theta.size(); }
};

inline PolarGrid make_grid(const GridSpec& g) {
    if (g.n_r < 2 || g.n_theta < 4) throw DomainError("grid too small");
    PolarGrid pg;
    pg.dtheta = 2.0 * std::numbers::pi / static_cast<double>(g.n_theta);
    pg.theta.resize(g.n_theta);
    for (std::size_t j = 0; j < g.n_theta; ++j) pg.theta[j] = pg.dtheta * static_cast<double>(j);
    if (g.spacing == RadialSpacing::Gauss) {
        const auto rule = quadrature::radial_area_rule(g.n_r);
        pg.r = rule.nodes;
        pg.radial_weight = rule.weights;
    } else {
        pg.r.resize(g.n_r);
        pg.radial_weight.resize(g.n_r);
        const double h = (1.0 - g.r_min) / static_cast<double>(g.n_r - 1);
        for (std::size_t i = 0; i < g.n_r; ++i) {
            pg.r[i] = g.r_min + h * static_cast<double>(i);
            const double tw = (i == 0 || i + 1 == g.n_r) ? 0.5 * h : h;
            pg.radial_weight[i] = tw * pg.r[i];
        }
    }
    return pg;
}

struct WaveField {
    PolarGrid grid;
    std::vector<cplx> psi1;  // n_r x n_theta, row-major in r
    std::vector<cplx> psi2;
    std::vector<double> jac;     // |w'(z)|^2 at the grid points
    std::vector<cplx> dir;       // w'(z)/|w'(z)|, local rotation z-plane -> w-plane
    std::vector<cplx> positions_w;
    double k = 0.0;

    std::size_t at(std::size_t i, std::size_t j) const noexcept { return i * grid.n_theta() + j; }
    double density(std::size_t p) const noexcept { return std::norm(psi1[p]) + std::norm(psi2[p]); }

    /// sum rho |w'|^2 dA over the grid.
    double weighted_norm() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < grid.n_r(); ++i)
            for (std::size_t j = 0; j < grid.n_theta(); ++j) {
                const auto p = at(i, j);
                acc += density(p) * jac[p] * grid.radial_weight[i] * grid.dtheta;
            }
        return acc;
    }
};

/// Precomputed radial tables and angular phases for repeated reconstruction on one grid.
class Reconstructor {
public:
    Reconstructor(const Basis& basis, const BilliardShape& shape, const GridSpec& spec)
        : basis_(&basis), grid_(make_grid(spec)), table_(basis, grid_.r) {
        const int n_l = basis.l_max - basis.l_min + 1;
        const auto nt = grid_.n_theta();
        phase_.resize(static_cast<std::size_t>(n_l + 1) * nt);
        for (int li = 0; li <= n_l; ++li)
            for (std::size_t j = 0; j < nt; ++j)
                phase_[static_cast<std::size_t>(li) * nt + j] =
                    std::polar(1.0, static_cast<double>(basis.l_min + li) * grid_.theta[j]);
        const auto np = grid_.n_r() * nt;
        jac_.resize(np);
        dir_.resize(np);
        pos_.resize(np);
        for (std::size_t i = 0; i < grid_.n_r(); ++i)
            for (std::size_t j = 0; j < nt; ++j) {
                const cplx z = std::polar(grid_.r[i], grid_.theta[j]);
                const cplx d = confmap::derivative(shape, z);
                const auto p = i * nt + j;
                jac_[p] = std::norm(d);
                dir_[p] = d / std::abs(d);
                pos_[p] = confmap::map(shape, z);
            }
    }

    const PolarGrid& grid() const noexcept { return grid_; }

    /// Field of a coefficient vector (dim entries, basis order).
    WaveField field(const Eigen::Ref<const Eigen::VectorXcd>& c, double k) const {
        const auto& b = *basis_;
        const int n_l = b.l_max - b.l_min + 1;
        const auto nr = grid_.n_r(), nt = grid_.n_theta();
        WaveField f;
        f.grid = grid_;
        f.k = k;
        f.jac = jac_;
        f.dir = dir_;
        f.positions_w = pos_;
        f.psi1.assign(nr * nt, cplx{});
        f.psi2.assign(nr * nt, cplx{});
        const cplx I(0.0, 1.0);
        Eigen::VectorXcd r1(static_cast<Eigen::Index>(nr)), r2(static_cast<Eigen::Index>(nr));
        for (int li = 0; li < n_l; ++li) {
            const auto seg = c.segment(static_cast<Eigen::Index>(li) * b.m_max, b.m_max);
            if (seg.cwiseAbs2().sum() == 0.0) continue;
            r1 = table_.phi[static_cast<std::size_t>(li)].cast<cplx>() * seg;
            r2 = I * (table_.chi[static_cast<std::size_t>(li)].cast<cplx>() * seg);
            const cplx* ph1 = &phase_[static_cast<std::size_t>(li) * nt];
            const cplx* ph2 = &phase_[static_cast<std::size_t>(li + 1) * nt];
            for (std::size_t i = 0; i < nr; ++i) {
                const cplx a1 = r1(static_cast<Eigen::Index>(i));
                const cplx a2 = r2(static_cast<Eigen::Index>(i));
                cplx* p1 = &f.psi1[i * nt];
                cplx* p2 = &f.psi2[i * nt];
                for (std::size_t j = 0; j < nt; ++j) {
                    p1[j] += a1 * ph1[j];
                    p2[j] += a2 * ph2[j];
                }
            }
        }
        return f;
    }

private:
    const Basis* basis_;
    PolarGrid grid_;
    RadialTable table_;
    std::vector<cplx> phase_;  // e^{i l theta_j} for l = l_min .. l_max + 1
    std::vector<double> jac_;
    std::vector<cplx> dir_;
    std::vector<cplx> pos_;
};

/// Spinor field of state n on the requested polar grid.
inline WaveField reconstruct(const Spectrum& spec, std::size_t n, const GridSpec& grid = {}) {
    if (n >= spec.n_vectors()) throw DomainError("reconstruct: state index has no stored vector");
    const Reconstructor rc(spec.basis, spec.shape, grid);
    return rc.field(spec.coeffs.col(static_cast<Eigen::Index>(n)), spec.k[n]);
}

/// CSV for plotting: u,v,density,current_u,current_v (current rotated into the w-plane).
inline void write_field_csv(std::ostream& os, const WaveField& f) {
    os << "u,v,density,current_u,current_v\n";
    char buf[200];
    for (std::size_t p = 0; p < f.psi1.size(); ++p) {
        const cplx uz = 2.0 * std::conj(f.psi1[p]) * f.psi2[p];
        const cplx uw = uz * f.dir[p];
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g\n", f.positions_w[p].real(),
                      f.positions_w[p].imag(), f.density(p), uw.real(), uw.imag());
        os << buf;
    }
}

// ---------------------------------------------------------------------------------------
// Spectrum archive
//
// <stem>.json holds the shape, flux, basis window, tolerances and the k list; <stem>.bin holds
// the coefficient vectors as n_vectors x dim complex doubles, row-major (state-major), each
// complex number stored as (real, imag) little-endian IEEE-754 binary64.

inline constexpr int kArchiveVersion = 1;

namespace detail {

inline void put_le(std::ostream& os, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw IoError("spectrum archive: truncated coefficient blob");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace detail

inline nlohmann::json archive_manifest(const Spectrum& sp, const std::string& blob_name) {
    nlohmann::json j;
    j["format"] = "diracscar-spectrum";
    j["version"] = kArchiveVersion;
    j["shape"] = {{"b", sp.shape.b()}, {"c", sp.shape.c()}, {"delta", sp.shape.delta()}};
    j["alpha"] = sp.alpha;
    j["basis"] = {{"l_min", sp.basis.l_min}, {"l_max", sp.basis.l_max}, {"m_max", sp.basis.m_max},
                  {"dim", sp.basis.size()}};
    j["tolerances"] = {{"hermiticity", kHermiticityTolerance},
                       {"radial_quadrature_order", kRadialQuadratureOrder},
                       {"validated_k_max", kValidatedKMax}};
    j["discarded"] = sp.discarded;
    j["k"] = sp.k;
    j["n_vectors"] = sp.n_vectors();
    j["coefficients"] = {{"file", blob_name},
                         {"layout", "n_vectors x dim complex128 (re, im), row-major, little-endian"}};
    return j;
}

/// Writes <stem>.json and <stem>.bin; returns the two paths.
inline std::pair<std::filesystem::path, std::filesystem::path> save_spectrum(const Spectrum& sp,
                                                                             const std::filesystem::path& stem) {
    const auto json_path = std::filesystem::path(stem.string() + ".json");
    const auto bin_path = std::filesystem::path(stem.string() + ".bin");
    {
        std::ofstream b(bin_path, std::ios::binary);
        if (!b) throw IoError("cannot write " + bin_path.string());
        for (Eigen::Index s = 0; s < sp.coeffs.cols(); ++s)
            for (Eigen::Index i = 0; i < sp.coeffs.rows(); ++i) {
                detail::put_le(b, sp.coeffs(i, s).real());
                detail::put_le(b, sp.coeffs(i, s).imag());
            }
        if (!b) throw IoError("failed writing " + bin_path.string());
    }
    std::ofstream j(json_path);
    if (!j) throw IoError("cannot write " + json_path.string());
    j << archive_manifest(sp, bin_path.filename().string()).dump(2) << "\n";
    return {json_path, bin_path};
}

/// Reads an archive written by save_spectrum; the basis is rebuilt from its recorded window.
inline Spectrum load_spectrum(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot open " + json_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed spectrum manifest " + json_path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "diracscar-spectrum") throw IoError("not a spectrum archive: " + json_path.string());
    Spectrum sp;
    const auto& sh = j.at("shape");
    sp.shape = BilliardShape(sh.at("b").get<double>(), sh.at("c").get<double>(), sh.at("delta").get<double>());
    sp.alpha = j.at("alpha").get<double>();
    const auto& bj = j.at("basis");
    sp.basis = diskbasis::build_basis(diskbasis::FluxParameter::unreduced(sp.alpha), bj.at("l_min").get<int>(),
                                      bj.at("l_max").get<int>(), bj.at("m_max").get<int>());
    sp.k = j.at("k").get<std::vector<double>>();
    sp.discarded = j.at("discarded").get<std::size_t>();
    const auto dim = static_cast<Eigen::Index>(sp.basis.size());
    if (bj.at("dim").get<Eigen::Index>() != dim) throw IoError("spectrum archive: basis dimension mismatch");
    const auto nv = j.at("n_vectors").get<Eigen::Index>();
    const auto blob = json_path.parent_path() / j.at("coefficients").at("file").get<std::string>();
    std::ifstream b(blob, std::ios::binary);
    if (!b) throw IoError("cannot open " + blob.string());
    sp.coeffs.resize(dim, nv);
    for (Eigen::Index s = 0; s < nv; ++s)
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double re = detail::get_le(b);
            const double im = detail::get_le(b);
            sp.coeffs(i, s) = {re, im};
        }
    return sp;
}

}  // namespace diracscar::spectral
