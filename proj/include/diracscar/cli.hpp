#pragma once

// Pipeline orchestration: run configuration, command execution, persistence and the run
// manifest (file inventory with SHA-256 digests).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "diracscar/confmap.hpp"
#include "diracscar/errors.hpp"
#include "diracscar/orbits.hpp"
#include "diracscar/scars.hpp"
#include "diracscar/semiclassics.hpp"
#include "diracscar/spectral.hpp"

namespace diracscar::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputRootVariable = "DIRACSCAR_OUTPUT_ROOT";

enum ExitCode : int { kSuccess = 0, kConfigFailure = 1, kNumericFailure = 2, kMissingPrerequisite = 3 };

// ---------------------------------------------------------------------------------------
// Configuration

struct ShapeConfig {
    std::string preset = "heart";  // empty when explicit coefficients are used
    double b = 0.49, c = 0.0, delta = 0.0;

    confmap::BilliardShape build() const {
        if (!preset.empty()) {
            auto s = confmap::BilliardShape::preset(preset);
            if (!s) throw ConfigError("unknown shape preset '" + preset + "' (heart, africa, disk)");
            return *s;
        }
        return {b, c, delta};
    }
    std::string tag() const { return preset.empty() ? std::string("custom") : preset; }
};

struct SweepConfig {
    double start = 0.0;
    double stop = 0.95;
    double step = 0.05;
};

struct PlaneWaveConfig {
    double E = 1.0;
    std::optional<double> V;  // absent: hard-wall limit
    int energy_sign = 1;
    int potential_sign = 1;
    int n_angles = 181;
};

struct RunConfig {
    ShapeConfig shape;
    double alpha = 0.0;
    SweepConfig sweep;
    spectral::Truncation truncation;
    double k_max = spectral::kValidatedKMax;
    std::size_t grid_r = 160;
    std::size_t grid_theta = 512;
    int max_bounces = 5;
    std::size_t seeds = 512;
    double threshold = scars::kDefaultThreshold;
    double tube_fraction = scars::kDefaultDetectTubeFraction;
    double min_curvature_radius = scars::kDefaultMinCurvatureRadius;
    double noise_floor = scars::kNoiseFloor;
    PlaneWaveConfig planewave;
    std::vector<std::size_t> states{0};
    std::string transform;  // optional symmetry operation applied on export
    bool save_sweep_vectors = false;
    int jobs = 1;
    std::string output = "run";

    std::vector<double> alphas() const {
        std::vector<double> a;
        const auto n = static_cast<long>(std::floor((sweep.stop - sweep.start) / sweep.step + 1e-9));
        for (long i = 0; i <= n; ++i) a.push_back(sweep.start + static_cast<double>(i) * sweep.step);
        return a;
    }

    scars::DetectOptions detect_options() const {
        scars::DetectOptions o;
        o.threshold = threshold;
        o.grid = {grid_r, grid_theta, spectral::RadialSpacing::Gauss, 1e-3};
        o.tube_fraction = tube_fraction;
        o.k_max = k_max;
        o.noise_floor = noise_floor;
        o.min_curvature_radius = min_curvature_radius;
        return o;
    }
};

inline std::optional<semiclassics::SymmetryOp> parse_transform(const std::string& s) {
    using semiclassics::SymmetryOp;
    for (auto op : {SymmetryOp::NegateE, SymmetryOp::TimeReversal, SymmetryOp::Combined, SymmetryOp::Parity,
                    SymmetryOp::Mirror})
        if (semiclassics::to_string(op) == s) return op;
    return std::nullopt;
}

/// Throws ConfigError naming the first violated bound.
inline void validate(const RunConfig& c) {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    (void)c.shape.build();
    if (!std::isfinite(c.alpha)) fail("alpha must be finite");
    if (!(c.sweep.step > 0.0)) fail("sweep.step must be > 0");
    if (!(c.sweep.stop >= c.sweep.start)) fail("sweep.stop must be >= sweep.start");
    if (c.alphas().size() > 10000) fail("sweep has more than 10000 points");
    if (c.truncation.l_max < 1) fail("truncation.l_max must be >= 1");
    if (c.truncation.m_max < 1) fail("truncation.m_max must be >= 1");
    if (!(c.k_max > 0.0)) fail("k_max must be > 0");
    if (c.grid_r < 8 || c.grid_theta < 16) fail("grid must be at least 8 x 16");
    if (c.max_bounces < 2 || c.max_bounces > 8) fail("orbits.max_bounces must lie in [2, 8]");
    if (c.seeds < 1) fail("orbits.seeds must be >= 1");
    if (!(c.threshold > 0.0)) fail("scars.threshold must be > 0");
    if (!(c.tube_fraction > 0.0 && c.tube_fraction < 0.5)) fail("scars.tube_fraction must lie in (0, 0.5)");
    if (!(c.min_curvature_radius >= 0.0)) fail("scars.min_curvature_radius must be >= 0");
    if (!(c.noise_floor >= 0.0)) fail("scars.noise_floor must be >= 0");
    const auto& p = c.planewave;
    if (!(p.E > 0.0)) fail("planewave.E must be > 0");
    if (p.V && !(*p.V > p.E)) fail("planewave.V must exceed planewave.E");
    if (p.energy_sign != 1 && p.energy_sign != -1) fail("planewave.energy_sign must be +1 or -1");
    if (p.potential_sign != 1 && p.potential_sign != -1) fail("planewave.potential_sign must be +1 or -1");
    if (p.n_angles < 2) fail("planewave.n_angles must be >= 2");
    if (!c.transform.empty() && !parse_transform(c.transform))
        fail("export.transform must be one of negate_e, time_reversal, combined, parity, mirror");
    if (c.jobs < 1) fail("jobs must be >= 1");
    if (c.output.empty()) fail("output must not be empty");
}

inline json to_json(const RunConfig& c) {
    json shape = c.shape.preset.empty() ? json{{"b", c.shape.b}, {"c", c.shape.c}, {"delta", c.shape.delta}}
                                        : json{{"preset", c.shape.preset}};
    json pw{{"E", c.planewave.E},
            {"energy_sign", c.planewave.energy_sign},
            {"potential_sign", c.planewave.potential_sign},
            {"n_angles", c.planewave.n_angles}};
    pw["V"] = c.planewave.V ? json(*c.planewave.V) : json();
    return {{"shape", shape},
            {"alpha", c.alpha},
            {"sweep", {{"start", c.sweep.start}, {"stop", c.sweep.stop}, {"step", c.sweep.step}}},
            {"truncation", {{"l_max", c.truncation.l_max}, {"m_max", c.truncation.m_max}}},
            {"k_max", c.k_max},
            {"grid", {{"n_r", c.grid_r}, {"n_theta", c.grid_theta}}},
            {"orbits", {{"max_bounces", c.max_bounces}, {"seeds", c.seeds}}},
            {"scars",
             {{"threshold", c.threshold},
              {"tube_fraction", c.tube_fraction},
              {"min_curvature_radius", c.min_curvature_radius},
              {"noise_floor", c.noise_floor}}},
            {"planewave", pw},
            {"export", {{"states", c.states}, {"transform", c.transform}, {"save_sweep_vectors", c.save_sweep_vectors}}},
            {"jobs", c.jobs},
            {"output", c.output}};
}

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end())
            throw ConfigError("unknown configuration key '" + (where.empty() ? k : where + "." + k) + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("configuration key '" + where + key + "' has the wrong type");
    }
}

}  // namespace detail

/// Overlays the keys present in j onto c. Unknown keys are rejected.
inline void apply_json(RunConfig& c, const json& j) {
    using detail::check_keys;
    using detail::read;
    check_keys(j, "", {"shape", "alpha", "sweep", "truncation", "k_max", "grid", "orbits", "scars", "planewave",
                       "export", "jobs", "output"});
    if (j.contains("shape")) {
        const auto& s = j.at("shape");
        check_keys(s, "shape", {"preset", "b", "c", "delta"});
        if (s.contains("preset")) {
            if (s.contains("b") || s.contains("c") || s.contains("delta"))
                throw ConfigError("shape: give either a preset or (b, c, delta), not both");
            read(s, "preset", c.shape.preset, "shape.");
        } else {
            c.shape.preset.clear();
            c.shape.b = c.shape.c = c.shape.delta = 0.0;
            read(s, "b", c.shape.b, "shape.");
            read(s, "c", c.shape.c, "shape.");
            read(s, "delta", c.shape.delta, "shape.");
        }
    }
    read(j, "alpha", c.alpha, "");
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        check_keys(s, "sweep", {"start", "stop", "step"});
        read(s, "start", c.sweep.start, "sweep.");
        read(s, "stop", c.sweep.stop, "sweep.");
        read(s, "step", c.sweep.step, "sweep.");
    }
    if (j.contains("truncation")) {
        const auto& s = j.at("truncation");
        check_keys(s, "truncation", {"l_max", "m_max"});
        read(s, "l_max", c.truncation.l_max, "truncation.");
        read(s, "m_max", c.truncation.m_max, "truncation.");
    }
    read(j, "k_max", c.k_max, "");
    if (j.contains("grid")) {
        const auto& s = j.at("grid");
        check_keys(s, "grid", {"n_r", "n_theta"});
        read(s, "n_r", c.grid_r, "grid.");
        read(s, "n_theta", c.grid_theta, "grid.");
    }
    if (j.contains("orbits")) {
        const auto& s = j.at("orbits");
        check_keys(s, "orbits", {"max_bounces", "seeds"});
        read(s, "max_bounces", c.max_bounces, "orbits.");
        read(s, "seeds", c.seeds, "orbits.");
    }
    if (j.contains("scars")) {
        const auto& s = j.at("scars");
        check_keys(s, "scars", {"threshold", "tube_fraction", "min_curvature_radius", "noise_floor"});
        read(s, "threshold", c.threshold, "scars.");
        read(s, "tube_fraction", c.tube_fraction, "scars.");
        read(s, "min_curvature_radius", c.min_curvature_radius, "scars.");
        read(s, "noise_floor", c.noise_floor, "scars.");
    }
    if (j.contains("planewave")) {
        const auto& s = j.at("planewave");
        check_keys(s, "planewave", {"E", "V", "energy_sign", "potential_sign", "n_angles"});
        read(s, "E", c.planewave.E, "planewave.");
        if (s.contains("V")) {
            if (s.at("V").is_null()) c.planewave.V.reset();
            else {
                double v = 0.0;
                read(s, "V", v, "planewave.");
                c.planewave.V = v;
            }
        }
        read(s, "energy_sign", c.planewave.energy_sign, "planewave.");
        read(s, "potential_sign", c.planewave.potential_sign, "planewave.");
        read(s, "n_angles", c.planewave.n_angles, "planewave.");
    }
    if (j.contains("export")) {
        const auto& s = j.at("export");
        check_keys(s, "export", {"states", "transform", "save_sweep_vectors"});
        read(s, "states", c.states, "export.");
        read(s, "transform", c.transform, "export.");
        read(s, "save_sweep_vectors", c.save_sweep_vectors, "export.");
    }
    read(j, "jobs", c.jobs, "");
    read(j, "output", c.output, "");
}

inline RunConfig load_config(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open configuration file " + p.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("configuration file " + p.string() + " is not valid JSON: " + e.what());
    }
    RunConfig c;
    apply_json(c, j);
    return c;
}

/// Output directory: relative paths resolve under $DIRACSCAR_OUTPUT_ROOT when it is set.
inline fs::path output_dir(const RunConfig& c) {
    fs::path out(c.output);
    if (out.is_relative()) {
        if (const char* root = std::getenv(kOutputRootVariable); root && *root) out = fs::path(root) / out;
    }
    return out;
}

// ---------------------------------------------------------------------------------------
// Digests and manifest

inline std::string sha256_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw MissingPrerequisite(p.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("sha256: digest initialisation failed");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// manifest.json in the output directory. Every command appends a run entry and refreshes
/// the digests of the files it wrote; prerequisites are checked against recorded digests.
class Manifest {
public:
    explicit Manifest(fs::path dir) : dir_(std::move(dir)) {
        const auto p = path();
        if (fs::exists(p)) {
            std::ifstream in(p);
            try {
                in >> doc_;
            } catch (const json::exception& e) {
                throw IoError("manifest " + p.string() + " is not valid JSON: " + e.what());
            }
        }
        if (!doc_.is_object()) doc_ = json::object();
        if (!doc_.contains("files")) doc_["files"] = json::object();
        if (!doc_.contains("runs")) doc_["runs"] = json::array();
    }

    fs::path path() const { return dir_ / "manifest.json"; }
    const json& doc() const { return doc_; }

    void begin(const std::string& command, const RunConfig& c) {
        run_ = {{"command", command}, {"tool_version", kToolVersion}, {"config", to_json(c)}, {"started", utc_now()}};
        written_.clear();
    }

    void record(const fs::path& file) {
        const auto rel = fs::relative(file, dir_).generic_string();
        doc_["files"][rel] = {{"sha256", sha256_file(file)},
                              {"bytes", fs::file_size(file)},
                              {"command", run_.value("command", "")},
                              {"written", utc_now()}};
        written_.push_back(rel);
    }

    /// Path of a prerequisite that must exist and match its recorded digest.
    fs::path require(const std::string& rel) const {
        const auto p = dir_ / rel;
        if (!fs::exists(p)) throw MissingPrerequisite(p.string());
        if (doc_["files"].contains(rel)) {
            const auto want = doc_["files"][rel].value("sha256", "");
            if (sha256_file(p) != want)
                throw MissingPrerequisite(p.string() + " (content differs from the manifest digest; re-run the producing command)");
        }
        return p;
    }

    void finish(const json& extra = json::object()) {
        run_["finished"] = utc_now();
        run_["outputs"] = written_;
        for (const auto& [k, v] : extra.items()) run_[k] = v;
        doc_["runs"].push_back(run_);
        doc_["tool_version"] = kToolVersion;
        std::ofstream out(path());
        if (!out) throw IoError("cannot write " + path().string());
        out << doc_.dump(2) << "\n";
    }

private:
    fs::path dir_;
    json doc_;
    json run_;
    std::vector<std::string> written_;
};

// ---------------------------------------------------------------------------------------
// Commands

struct Logger {
    std::mutex mu;
    void operator()(const std::string& msg) {
        std::lock_guard<std::mutex> lock(mu);
        std::fprintf(stderr, "[diracscar] %s\n", msg.c_str());
    }
};

inline Logger& log() {
    static Logger l;
    return l;
}

inline std::string alpha_tag(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "a%.4f", a);
    return buf;
}

inline std::string spectrum_stem(double alpha) { return "spectrum_" + alpha_tag(alpha); }

template <class F>
fs::path write_file(const fs::path& p, F&& body) {
    std::ofstream os(p);
    if (!os) throw IoError("cannot write " + p.string());
    body(os);
    if (!os) throw IoError("failed writing " + p.string());
    return p;
}

/// Solves one flux value and keeps coefficient vectors for states with k <= k_max.
inline spectral::Spectrum solve_point(const RunConfig& c, double alpha, bool keep_vectors = true) {
    const auto shape = c.shape.build();
    auto sp = spectral::compute_spectrum(shape, alpha, c.truncation);
    std::size_t keep = 0;
    while (keep < sp.k.size() && sp.k[keep] <= c.k_max) ++keep;
    if (!keep_vectors) keep = 0;
    sp.coeffs.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(keep));
    if (!sp.basis.spans_window)
        log()("warning: basis channels do not span the target window; raise m_max");
    if (c.k_max > spectral::kValidatedKMax)
        log()("warning: k_max exceeds the validated window k <= " + std::to_string(spectral::kValidatedKMax));
    return sp;
}

inline void write_k_csv(std::ostream& os, const spectral::Spectrum& sp) {
    os << "n,k\n";
    char buf[64];
    for (std::size_t n = 0; n < sp.k.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g\n", n, sp.k[n]);
        os << buf;
    }
}

inline int cmd_solve(const RunConfig& c) {
    const auto dir = output_dir(c);
    fs::create_directories(dir);
    Manifest m(dir);
    m.begin("solve", c);
    const auto t0 = std::chrono::steady_clock::now();
    const auto sp = solve_point(c, c.alpha);
    const auto [j, b] = spectral::save_spectrum(sp, dir / spectrum_stem(c.alpha));
    m.record(j);
    m.record(b);
    m.record(write_file(dir / ("k_" + alpha_tag(c.alpha) + ".csv"), [&](std::ostream& os) { write_k_csv(os, sp); }));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log()("solve: " + std::to_string(sp.k.size()) + " states, " + std::to_string(sp.discarded) + " discarded, " +
          std::to_string(sp.n_vectors()) + " vectors stored");
    m.finish({{"seconds", secs}, {"n_states", sp.k.size()}, {"discarded", sp.discarded}});
    return kSuccess;
}

inline std::vector<orbits::Orbit> catalog_for(const RunConfig& c) {
    return orbits::find_catalog(c.shape.build(), c.max_bounces, c.seeds);
}

inline int cmd_orbits(const RunConfig& c) {
    const auto dir = output_dir(c);
    fs::create_directories(dir);
    Manifest m(dir);
    m.begin("orbits", c);
    const auto shape = c.shape.build();
    const auto cat = catalog_for(c);
    json j{{"shape", to_json(c)["shape"]}, {"orbits", orbits::catalog_json(cat)}};
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const auto d = semiclassics::phase_data(cat[i]);
        j["orbits"][i]["min_curvature_radius"] = orbits::min_curvature_radius(shape, cat[i]);
        j["orbits"][i]["beta_spin"] = {{"CCW", d.beta_ccw}, {"CW", d.beta_cw}};
        j["orbits"][i]["gamma_pred"] = {{"CCW", d.gamma_ccw}, {"CW", d.gamma_cw}};
        j["orbits"][i]["chiral_gap"] = semiclassics::accumulate_phase(cat[i], orbits::Orientation::CCW).chiral_gap;
    }
    m.record(write_file(dir / "orbits.json", [&](std::ostream& os) { os << j.dump(2) << "\n"; }));
    m.record(write_file(dir / "orbits_polylines.csv", [&](std::ostream& os) { orbits::write_polylines_csv(os, cat); }));
    m.record(write_file(dir / ("predictions_" + alpha_tag(c.alpha) + ".csv"),
                        [&](std::ostream& os) { semiclassics::write_predictions_csv(os, cat, c.alpha, c.k_max); }));
    log()("orbits: " + std::to_string(cat.size()) + " periodic orbits");
    m.finish({{"n_orbits", cat.size()}});
    return kSuccess;
}

inline std::vector<orbits::Orbit> load_catalog(const fs::path& p) {
    std::ifstream in(p);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("orbit catalog " + p.string() + " is not valid JSON: " + e.what());
    }
    std::vector<orbits::Orbit> out;
    for (const auto& o : j.at("orbits")) out.push_back(orbits::orbit_from_json(o));
    return out;
}

inline int cmd_scars(const RunConfig& c) {
    const auto dir = output_dir(c);
    Manifest m(dir);
    const auto spec_path = m.require(spectrum_stem(c.alpha) + ".json");
    (void)m.require(spectrum_stem(c.alpha) + ".bin");
    const auto cat_path = m.require("orbits.json");
    m.begin("scars", c);
    const auto sp = spectral::load_spectrum(spec_path);
    const auto cat = load_catalog(cat_path);
    const auto recs = scars::detect_scars(sp, cat, c.detect_options());
    m.record(write_file(dir / ("scars_" + alpha_tag(c.alpha) + ".csv"),
                        [&](std::ostream& os) { scars::write_scar_csv(os, recs); }));
    log()("scars: " + std::to_string(recs.size()) + " scarred states");
    m.finish({{"n_scars", recs.size()}});
    return kSuccess;
}

inline int cmd_planewave(const RunConfig& c) {
    const auto dir = output_dir(c);
    fs::create_directories(dir);
    Manifest m(dir);
    m.begin("planewave", c);
    semiclassics::PlaneWaveScenario s;
    s.E = c.planewave.E;
    s.potential = c.planewave.V.value_or(std::numeric_limits<double>::infinity());
    s.energy_sign = c.planewave.energy_sign;
    s.potential_sign = c.planewave.potential_sign;
    m.record(write_file(dir / "planewave.csv", [&](std::ostream& os) {
        os << "theta0,R_re,R_im,abs_R,gamma,T_re,T_im,lambda,q_decay,spin,spin_residual,sigma_z\n";
        char buf[400];
        const double lim = 0.5 * std::numbers::pi;
        for (int i = 0; i < c.planewave.n_angles; ++i) {
            // open interval (-pi/2, pi/2)
            s.incident_angle = -lim + 2.0 * lim * (i + 0.5) / c.planewave.n_angles;
            const auto r = semiclassics::reflect_plane_wave(s);
            const auto sp = semiclassics::boundary_spin(s);
            std::snprintf(buf, sizeof buf, "%.12g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.1f,%.3g,%.15g\n",
                          s.incident_angle, r.R.real(), r.R.imag(), std::abs(r.R), r.gamma_angle, r.T.real(),
                          r.T.imag(), r.lambda_ratio, r.q_decay, sp.spin, sp.eigen_residual, sp.sigma_z);
            os << buf;
        }
    }));
    json table = json::array();
    for (const auto& r : semiclassics::symmetry_table()) table.push_back(semiclassics::to_json(r));
    m.record(write_file(dir / "symmetry.json", [&](std::ostream& os) {
        os << json{{"rows", table}, {"order", "(E,V,I) (E,-V,I) (E,V,M) (E,-V,M) (-E,V,I) (-E,-V,I) (-E,V,M) (-E,-V,M)"}}.dump(2)
           << "\n";
    }));
    m.finish();
    return kSuccess;
}

inline int cmd_export(const RunConfig& c) {
    const auto dir = output_dir(c);
    Manifest m(dir);
    const auto spec_path = m.require(spectrum_stem(c.alpha) + ".json");
    (void)m.require(spectrum_stem(c.alpha) + ".bin");
    m.begin("export", c);
    const auto sp = spectral::load_spectrum(spec_path);
    const spectral::Reconstructor rc(sp.basis, sp.shape, {c.grid_r, c.grid_theta, spectral::RadialSpacing::Uniform, 1e-3});
    m.record(write_file(dir / "boundary.csv", [&](std::ostream& os) {
        confmap::write_boundary_csv(os, confmap::boundary(sp.shape, 2048));
    }));
    const auto op = c.transform.empty() ? std::nullopt : parse_transform(c.transform);
    for (auto n : c.states) {
        if (n >= sp.n_vectors())
            throw DomainError("export: state " + std::to_string(n) + " has no stored vector (raise k_max and re-solve)");
        auto f = rc.field(sp.coeffs.col(static_cast<Eigen::Index>(n)), sp.k[n]);
        std::string name = "field_" + alpha_tag(c.alpha) + "_n" + std::to_string(n);
        if (op) {
            f = semiclassics::symmetry_transform(f, *op);
            name += "_" + c.transform;
        }
        m.record(write_file(dir / (name + ".csv"), [&](std::ostream& os) { spectral::write_field_csv(os, f); }));
    }
    m.finish();
    return kSuccess;
}

struct SweepPoint {
    double alpha = 0.0;
    bool ok = false;
    std::string error;
    std::vector<double> k;
    std::vector<scars::ScarRecord> scars;
    std::vector<fs::path> files;
};

inline int cmd_sweep(const RunConfig& c) {
    const auto dir = output_dir(c);
    fs::create_directories(dir);
    Manifest m(dir);
    m.begin("sweep", c);
    const auto cat = catalog_for(c);
    const auto alphas = c.alphas();
    std::vector<SweepPoint> pts(alphas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < alphas.size();) {
            auto& p = pts[i];
            p.alpha = alphas[i];
            try {
                auto sp = solve_point(c, p.alpha);
                p.scars = scars::detect_scars(sp, cat, c.detect_options());
                p.k = sp.k;
                if (!c.save_sweep_vectors) sp.coeffs.resize(sp.coeffs.rows(), 0);
                const auto [j, b] = spectral::save_spectrum(sp, dir / spectrum_stem(p.alpha));
                p.files = {j, b};
                p.files.push_back(write_file(dir / ("scars_" + alpha_tag(p.alpha) + ".csv"),
                                             [&](std::ostream& os) { scars::write_scar_csv(os, p.scars); }));
                p.ok = true;
                log()("sweep: alpha=" + std::to_string(p.alpha) + " " + std::to_string(p.scars.size()) + " scars");
            } catch (const std::exception& e) {
                p.error = e.what();
                log()("sweep: alpha=" + std::to_string(p.alpha) + " failed: " + p.error);
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(c.jobs, static_cast<int>(alphas.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<std::pair<double, std::vector<scars::ScarRecord>>> runs;
    json failed = json::array();
    for (const auto& p : pts) {
        if (!p.ok) {
            failed.push_back({{"alpha", p.alpha}, {"error", p.error}});
            continue;
        }
        runs.push_back({p.alpha, p.scars});
        for (const auto& f : p.files) m.record(f);
    }
    if (runs.empty()) {
        m.finish({{"failed_points", failed}});
        throw NumericError("sweep: every flux point failed");
    }
    const auto shape = c.shape.build();
    const auto candidates = orbits::geometric_orbits(shape, cat, c.min_curvature_radius);
    json tracks = json::array();
    for (const auto& o : candidates) tracks.push_back(scars::to_json(scars::track_flux_sweep(runs, o)));
    m.record(write_file(dir / "tracks.json", [&](std::ostream& os) { os << json{{"orbits", tracks}}.dump(2) << "\n"; }));
    m.record(write_file(dir / "k_alpha.csv", [&](std::ostream& os) {
        os << "alpha,orbit_label,orientation,k,gamma\n";
        char buf[200];
        for (const auto& [a, recs] : runs)
            for (const auto& r : recs) {
                std::snprintf(buf, sizeof buf, "%.6f,%s,%s,%.12g,%.9g\n", a, r.orbit_label.c_str(),
                              scars::to_string(r.orientation).c_str(), r.k, r.gamma);
                os << buf;
            }
    }));
    m.finish({{"failed_points", failed}, {"n_points", runs.size()}});
    return kSuccess;
}

inline int dispatch(const std::string& command, const RunConfig& c) {
    validate(c);
    if (command == "solve") return cmd_solve(c);
    if (command == "sweep") return cmd_sweep(c);
    if (command == "orbits") return cmd_orbits(c);
    if (command == "scars") return cmd_scars(c);
    if (command == "planewave") return cmd_planewave(c);
    if (command == "export") return cmd_export(c);
    throw ConfigError("unknown command '" + command + "'");
}

/// Runs a command and maps failures onto exit codes.
inline int run_guarded(const std::string& command, const RunConfig& c) {
    try {
        return dispatch(command, c);
    } catch (const ConfigError& e) {
        log()(std::string("configuration error: ") + e.what());
        return kConfigFailure;
    } catch (const MissingPrerequisite& e) {
        log()(e.what());
        return kMissingPrerequisite;
    } catch (const std::exception& e) {
        log()(std::string("error: ") + e.what());
        return kNumericFailure;
    }
}

}  // namespace diracscar::cli
