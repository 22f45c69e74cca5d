// diracscar: command-line driver for the Dirac Aharonov-Bohm billiard pipeline.
//
//   diracscar <solve|sweep|orbits|scars|planewave|export> [--config run.json] [flags]
//
// Flags override values from the configuration file; see README.md for the schema.

#include <CLI11.hpp>

#include "diracscar/cli.hpp"

namespace dc = diracscar::cli;

int main(int argc, char** argv) {
    CLI::App app{"Dirac Aharonov-Bohm chaotic billiard laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", dc::kToolVersion);

    std::string config_path;
    std::string shape;
    double b = 0, c = 0, delta = 0;
    double alpha = 0, a_start = 0, a_stop = 0, a_step = 0, k_max = 0;
    int l_max = 0, m_max = 0, max_bounces = 0, jobs = 0;
    std::size_t grid_r = 0, grid_theta = 0, seeds = 0;
    double threshold = 0, tube = 0, min_curv = 0, noise = 0;
    double pw_e = 0, pw_v = 0;
    int e_sign = 0, v_sign = 0, n_angles = 0;
    std::vector<std::size_t> states;
    std::string transform, output;
    bool save_vectors = false;

    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    auto* o_shape = app.add_option("--shape", shape, "shape preset: heart, africa or disk");
    auto* o_b = app.add_option("--b", b, "map coefficient b (with --c, --delta)");
    auto* o_c = app.add_option("--c", c, "map coefficient c");
    auto* o_d = app.add_option("--delta", delta, "map phase delta");
    auto* o_alpha = app.add_option("--alpha", alpha, "flux in units of the flux quantum");
    auto* o_as = app.add_option("--alpha-start", a_start, "sweep start");
    auto* o_ae = app.add_option("--alpha-stop", a_stop, "sweep stop (inclusive)");
    auto* o_at = app.add_option("--alpha-step", a_step, "sweep step");
    auto* o_l = app.add_option("--l-max", l_max, "angular truncation |l| <= l_max");
    auto* o_m = app.add_option("--m-max", m_max, "radial modes per channel");
    auto* o_k = app.add_option("--k-max", k_max, "largest wavevector analysed");
    auto* o_gr = app.add_option("--grid-r", grid_r, "radial grid points");
    auto* o_gt = app.add_option("--grid-theta", grid_theta, "angular grid points");
    auto* o_mb = app.add_option("--max-bounces", max_bounces, "longest orbit period searched");
    auto* o_seeds = app.add_option("--seeds", seeds, "orbit search seeds per period");
    auto* o_th = app.add_option("--threshold", threshold, "scar threshold (enhancement over uniform)");
    auto* o_tf = app.add_option("--tube-fraction", tube, "tube width / billiard diameter");
    auto* o_mc = app.add_option("--min-curvature", min_curv, "smallest wall curvature radius for scar orbits");
    auto* o_nf = app.add_option("--noise-floor", noise, "relative circulation below which orientation is indeterminate");
    auto* o_pe = app.add_option("--E", pw_e, "plane-wave energy magnitude");
    auto* o_pv = app.add_option("--V", pw_v, "plane-wave wall potential (omit for the hard-wall limit)");
    auto* o_es = app.add_option("--energy-sign", e_sign, "+1 or -1");
    auto* o_vs = app.add_option("--potential-sign", v_sign, "+1 or -1");
    auto* o_na = app.add_option("--angles", n_angles, "number of incident angles");
    auto* o_st = app.add_option("--states", states, "state indices to export")->delimiter(',');
    auto* o_tr = app.add_option("--transform", transform, "symmetry operation applied on export");
    auto* o_sv = app.add_flag("--save-sweep-vectors", save_vectors, "store coefficient vectors for every sweep point");
    auto* o_j = app.add_option("--jobs", jobs, "parallel sweep points");
    auto* o_out = app.add_option("--output", output, "output directory (relative to $DIRACSCAR_OUTPUT_ROOT if set)");

    for (const char* name : {"solve", "sweep", "orbits", "scars", "planewave", "export"}) app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? dc::kSuccess : dc::kConfigFailure;
    }

    dc::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = dc::load_config(config_path);
        if (*o_shape) {
            cfg.shape.preset = shape;
        }
        if (*o_b || *o_c || *o_d) {
            if (*o_shape) throw diracscar::ConfigError("give either --shape or --b/--c/--delta");
            cfg.shape.preset.clear();
            cfg.shape.b = b;
            cfg.shape.c = c;
            cfg.shape.delta = delta;
        }
        if (*o_alpha) cfg.alpha = alpha;
        if (*o_as) cfg.sweep.start = a_start;
        if (*o_ae) cfg.sweep.stop = a_stop;
        if (*o_at) cfg.sweep.step = a_step;
        if (*o_l) cfg.truncation.l_max = l_max;
        if (*o_m) cfg.truncation.m_max = m_max;
        if (*o_k) cfg.k_max = k_max;
        if (*o_gr) cfg.grid_r = grid_r;
        if (*o_gt) cfg.grid_theta = grid_theta;
        if (*o_mb) cfg.max_bounces = max_bounces;
        if (*o_seeds) cfg.seeds = seeds;
        if (*o_th) cfg.threshold = threshold;
        if (*o_tf) cfg.tube_fraction = tube;
        if (*o_mc) cfg.min_curvature_radius = min_curv;
        if (*o_nf) cfg.noise_floor = noise;
        if (*o_pe) cfg.planewave.E = pw_e;
        if (*o_pv) cfg.planewave.V = pw_v;
        if (*o_es) cfg.planewave.energy_sign = e_sign;
        if (*o_vs) cfg.planewave.potential_sign = v_sign;
        if (*o_na) cfg.planewave.n_angles = n_angles;
        if (*o_st) cfg.states = states;
        if (*o_tr) cfg.transform = transform;
        if (*o_sv) cfg.save_sweep_vectors = save_vectors;
        if (*o_j) cfg.jobs = jobs;
        if (*o_out) cfg.output = output;
    } catch (const diracscar::ConfigError& e) {
        dc::log()(std::string("configuration error: ") + e.what());
        return dc::kConfigFailure;
    }
    return dc::run_guarded(app.get_subcommands().front()->get_name(), cfg);
}
