// Command-line front end: each subcommand runs one stage of the chain
// (or the full chain via `report`) on a run directory.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "hyperent/driver.hpp"

using namespace hyperent;

int main(int argc, char** argv) {
    CLI::App app{"Hyperentangled photon-pair stream synthesis and analysis"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);
    // Global options may appear after the subcommand name.
    app.fallthrough();

    std::string config_path;
    std::string out_dir = "run";
    uint64_t seed_override = 0;
    bool has_seed = false;
    int threads = 1;
    bool deterministic = false;
    app.add_option("--config,-c", config_path, "run configuration (JSON)")
        ->required();
    app.add_option("--out,-o", out_dir, "run directory for inputs/outputs");
    app.add_option("--seed", seed_override, "override the configured seed")
        ->each([&](const std::string&) { has_seed = true; });
    app.add_option("--threads,-j", threads, "worker threads for simulation");
    app.add_flag("--deterministic", deterministic,
                 "force single-threaded, fully reproducible execution");

    auto* sim = app.add_subcommand("simulate", "generate raw event streams");
    bool no_truth = false;
    sim->add_flag("--no-truth", no_truth, "skip ground-truth sidecars");
    auto* cen = app.add_subcommand("centroid", "cluster events into photons");
    auto* coi = app.add_subcommand("coincide", "pair photons across arms");
    auto* cor = app.add_subcommand(
        "correlate", "joint spatial distributions, widths, EPR products");
    auto* cer = app.add_subcommand(
        "certify", "spatial dimensionality bound from correlation matrices");
    auto* tom = app.add_subcommand(
        "tomo", "spatially resolved polarization tomography");
    auto* rep = app.add_subcommand("report", "full analysis chain + report.json");
    auto* gsc = app.add_subcommand(
        "gridscan", "diagonal coincidence fraction vs grid displacement");
    int max_offset = 3;
    gsc->add_option("--max-offset", max_offset, "scan range in pixels");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = RunConfig::load(config_path);
        if (has_seed) {
            cfg.seed = seed_override;
            cfg.detector.seed = seed_override;
        }
        if (deterministic) threads = 1;

        if (sim->parsed()) {
            run_simulate(cfg, out_dir, !no_truth, threads);
        } else if (cen->parsed()) {
            run_centroid(cfg, out_dir);
        } else if (coi->parsed()) {
            run_coincide(cfg, out_dir);
        } else if (cor->parsed()) {
            auto out = run_correlate(cfg, out_dir);
            std::printf("ff sum widths  : %.3f um (x), %.3f um (y)\n",
                        out.epr.delta_ff_x_um, out.epr.delta_ff_y_um);
            std::printf("nf diff widths : %.3f um (x), %.3f um (y)\n",
                        out.epr.delta_nf_x_um, out.epr.delta_nf_y_um);
            std::printf("EPR products   : %.4f hbar (x), %.4f hbar (y)\n",
                        out.epr.product_x, out.epr.product_y);
        } else if (cer->parsed()) {
            auto res = run_certify(cfg, out_dir);
            std::printf("F~ = %.5f  certified dimension = %d (of d = %d)\n",
                        res.f_tilde, res.certified_dim, res.d);
        } else if (tom->parsed()) {
            auto res = run_tomo(cfg, out_dir);
            std::printf("valid cells = %zu  avg C = %.4f +/- %.4f  avg E = "
                        "%.4f +/- %.4f\n",
                        res.aggregate.valid_cells, res.aggregate.avg_concurrence,
                        res.aggregate.err_concurrence, res.aggregate.avg_eof,
                        res.aggregate.err_eof);
            std::printf("spatial dim = %d  total dim = %d\n",
                        res.hyperdim.spatial_dim, res.hyperdim.total_dim);
        } else if (rep->parsed()) {
            auto res = run_report(cfg, out_dir);
            std::printf("spatial dim = %d  avg C = %.4f  avg E = %.4f  total "
                        "dim = %d\n",
                        res.certification.certified_dim,
                        res.aggregate.avg_concurrence, res.aggregate.avg_eof,
                        res.hyperdim.total_dim);
            std::printf("EPR products = %.4f hbar (x), %.4f hbar (y)\n",
                        res.epr.product_x, res.epr.product_y);
        } else if (gsc->parsed()) {
            run_gridscan(cfg, out_dir, max_offset);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
