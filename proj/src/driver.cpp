#include "hyperent/driver.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>

#include "hyperent/event_io.hpp"
#include "json.hpp"

namespace hyperent {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* plane_suffix(BasisPlane plane) {
    return plane == BasisPlane::far_field ? "ff" : "nf";
}

std::string run_file(const std::string& dir, const std::string& kind,
                     const std::string& label, BasisPlane plane,
                     const std::string& ext) {
    return (fs::path(dir) / (kind + "_" + label + "_" + plane_suffix(plane) + ext))
        .string();
}

// All acquisitions of one run: the 16 far-field tomography settings
// plus an optional near-field VV acquisition.
std::vector<MeasurementSetting> all_acquisitions(const RunConfig& cfg) {
    std::vector<MeasurementSetting> runs = cfg.settings();
    if (cfg.near_field_run) {
        MeasurementSetting nf;
        nf.label = "VV";
        nf.signal = waveplates_for('V');
        nf.idler = waveplates_for('V');
        for (const auto& s : runs)
            if (s.label == "VV") {
                nf = s;
                break;
            }
        nf.basis_plane = BasisPlane::near_field;
        runs.push_back(std::move(nf));
    }
    return runs;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

json epr_to_json(const EprResult& e) {
    return json{{"delta_ff_x_um", e.delta_ff_x_um},
                {"delta_ff_y_um", e.delta_ff_y_um},
                {"delta_nf_x_um", e.delta_nf_x_um},
                {"delta_nf_y_um", e.delta_nf_y_um},
                {"dp_x_hbar_per_um", e.dp_x},
                {"dp_y_hbar_per_um", e.dp_y},
                {"dq_x_um", e.dq_x},
                {"dq_y_um", e.dq_y},
                {"product_x_hbar", e.product_x},
                {"product_y_hbar", e.product_y},
                {"product_x_err", e.product_x_err},
                {"product_y_err", e.product_y_err},
                {"violation_x", e.violation_x},
                {"violation_y", e.violation_y}};
}

json certification_to_json(const CertificationResult& c) {
    json b_values = json::array();
    for (int k = std::max(1, c.certified_dim - 3);
         k <= std::min(c.d, c.certified_dim + 3); ++k)
        b_values.push_back({{"k", k}, {"b_k", fidelity_bound(k, c.d)}});
    return json{{"d", c.d},
                {"f1", c.f1},
                {"f2_tilde", c.f2_tilde},
                {"f_tilde", c.f_tilde},
                {"certified_dim", c.certified_dim},
                {"gamma_penalty", c.gamma_penalty},
                {"f_exceeds_one", c.f_exceeds_one},
                {"f1_weighted", c.f1_weighted},
                {"f_tilde_weighted", c.f_tilde_weighted},
                {"certified_dim_weighted", c.certified_dim_weighted},
                {"b_values", b_values}};
}

SuperpixelGrid momentum_grid_for(const RunConfig& cfg,
                                 const std::string& out_dir) {
    auto photons =
        read_photons(photons_path(out_dir, "VV", BasisPlane::far_field));
    return SuperpixelGrid::build(photons, cfg.detector.signal_roi,
                                 cfg.detector.idler_roi, SpatialBasis::momentum,
                                 cfg.grid.radius_px, cfg.grid.cell,
                                 cfg.grid.stride);
}

// Position grid sharing the momentum grid's lattice so mode labels
// stay aligned between the two bases.
SuperpixelGrid aligned_position_grid(const SuperpixelGrid& momentum,
                                     std::span<const CentroidedPhoton> nf) {
    SuperpixelGrid g = momentum;
    g.basis = SpatialBasis::position;
    double sx = 0, sy = 0, ix = 0, iy = 0;
    uint64_t ns = 0, ni = 0;
    for (const auto& p : nf) {
        if (p.arm == Arm::signal) {
            sx += p.cx;
            sy += p.cy;
            ++ns;
        } else {
            ix += p.cx;
            iy += p.cy;
            ++ni;
        }
    }
    if (ns == 0 || ni == 0)
        throw std::runtime_error("near-field data has an empty arm");
    g.signal_anchor_x = sx / ns;
    g.signal_anchor_y = sy / ns;
    g.idler_anchor_x = ix / ni;
    g.idler_anchor_y = iy / ni;
    for (size_t m = 0; m < g.signal_centers.size(); ++m) {
        auto [i, j] = g.lattice_index[m];
        g.signal_centers[m] = {g.signal_anchor_x + i * g.stride,
                               g.signal_anchor_y + j * g.stride};
    }
    return g;
}

CorrelateOutput compute_correlate(const RunConfig& cfg,
                                  const std::string& out_dir) {
    if (!cfg.near_field_run)
        throw std::runtime_error(
            "correlate requires a near-field acquisition (near_field_run)");
    CorrelateOutput out;
    out.momentum_grid = momentum_grid_for(cfg, out_dir);
    auto nf_photons =
        read_photons(photons_path(out_dir, "VV", BasisPlane::near_field));
    out.position_grid = aligned_position_grid(out.momentum_grid, nf_photons);

    auto ff_pairs = read_pairs(pairs_path(out_dir, "VV", BasisPlane::far_field));
    auto nf_pairs = read_pairs(pairs_path(out_dir, "VV", BasisPlane::near_field));
    out.momentum_matrix = bin_to_superpixels(ff_pairs, out.momentum_grid);
    out.position_matrix = bin_to_superpixels(nf_pairs, out.position_grid);

    const Roi& sr = cfg.detector.signal_roi;
    const Roi& ir = cfg.detector.idler_roi;
    double pitch = cfg.detector.pixel_pitch_um;
    out.ff_x = fit_gaussian_width(
        correlation_profile(ff_pairs, Axis::x, CoordCombination::sum, sr, ir),
        pitch);
    out.ff_y = fit_gaussian_width(
        correlation_profile(ff_pairs, Axis::y, CoordCombination::sum, sr, ir),
        pitch);
    out.nf_x = fit_gaussian_width(
        correlation_profile(nf_pairs, Axis::x, CoordCombination::difference, sr,
                            ir),
        pitch);
    out.nf_y = fit_gaussian_width(
        correlation_profile(nf_pairs, Axis::y, CoordCombination::difference, sr,
                            ir),
        pitch);
    out.epr = epr_products(cfg.detector, out.ff_x, out.ff_y, out.nf_x, out.nf_y);
    return out;
}

std::vector<CorrelationMatrix> tomography_matrices(
    const RunConfig& cfg, const std::string& out_dir,
    const SuperpixelGrid& grid) {
    std::vector<CorrelationMatrix> mats;
    for (const auto& s : cfg.settings()) {
        auto pairs = read_pairs(pairs_path(out_dir, s.label, BasisPlane::far_field));
        mats.push_back(bin_to_superpixels(pairs, grid));
    }
    return mats;
}

}  // namespace

std::string events_path(const std::string& dir, const std::string& label,
                        BasisPlane plane) {
    return run_file(dir, "events", label, plane, ".hypevt");
}
std::string truth_path(const std::string& dir, const std::string& label,
                       BasisPlane plane) {
    return run_file(dir, "truth", label, plane, ".csv.gz");
}
std::string photons_path(const std::string& dir, const std::string& label,
                         BasisPlane plane) {
    return run_file(dir, "photons", label, plane, ".phot");
}
std::string pairs_path(const std::string& dir, const std::string& label,
                       BasisPlane plane) {
    return run_file(dir, "pairs", label, plane, ".pairs");
}

void run_simulate(const RunConfig& cfg, const std::string& out_dir,
                  bool record_truth, int threads) {
    cfg.validate();
    fs::create_directories(out_dir);
    std::string hash = cfg.hash();
    auto runs = all_acquisitions(cfg);
    if (threads <= 0)
        threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(runs.size())));

    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= runs.size()) return;
            try {
                const auto& setting = runs[i];
                auto res = simulate_acquisition(cfg.source, cfg.detector, setting,
                                                derive_seed(cfg.seed, i),
                                                record_truth);
                write_events(events_path(out_dir, setting.label,
                                         setting.basis_plane),
                             res.events, hash);
                if (record_truth)
                    write_truth_csv_gz(
                        truth_path(out_dir, setting.label, setting.basis_plane),
                        res.truth);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void run_centroid(const RunConfig& cfg, const std::string& out_dir) {
    std::string hash = cfg.hash();
    ClusterParams params{cfg.pipeline.spatial_radius, cfg.pipeline.temporal_gap_ns};
    for (const auto& s : all_acquisitions(cfg)) {
        auto file = read_events(events_path(out_dir, s.label, s.basis_plane));
        auto res = cluster_and_centroid(file.events, params,
                                        cfg.detector.signal_roi,
                                        cfg.detector.idler_roi);
        write_photons(photons_path(out_dir, s.label, s.basis_plane), res.photons,
                      hash);
    }
}

void run_coincide(const RunConfig& cfg, const std::string& out_dir) {
    std::string hash = cfg.hash();
    for (const auto& s : all_acquisitions(cfg)) {
        auto photons = read_photons(photons_path(out_dir, s.label, s.basis_plane));
        auto [signal, idler] = split_by_arm(photons);
        auto pairs = find_coincidences(signal, idler, cfg.pipeline.window_ns);
        write_pairs(pairs_path(out_dir, s.label, s.basis_plane), pairs, hash);
    }
}

CorrelateOutput run_correlate(const RunConfig& cfg, const std::string& out_dir) {
    CorrelateOutput out = compute_correlate(cfg, out_dir);
    std::string hash = cfg.hash();
    fs::path dir(out_dir);
    write_matrix_csv((dir / "matrix_momentum.csv").string(), out.momentum_matrix,
                     hash);
    write_matrix_csv((dir / "matrix_position.csv").string(), out.position_matrix,
                     hash);

    auto ff_pairs = read_pairs(pairs_path(out_dir, "VV", BasisPlane::far_field));
    auto nf_pairs = read_pairs(pairs_path(out_dir, "VV", BasisPlane::near_field));
    const Roi& sr = cfg.detector.signal_roi;
    const Roi& ir = cfg.detector.idler_roi;
    write_histogram_csv(
        (dir / "profile_ff_sum_x.csv").string(),
        correlation_profile(ff_pairs, Axis::x, CoordCombination::sum, sr, ir),
        hash);
    write_histogram_csv(
        (dir / "profile_ff_sum_y.csv").string(),
        correlation_profile(ff_pairs, Axis::y, CoordCombination::sum, sr, ir),
        hash);
    write_histogram_csv((dir / "profile_nf_diff_x.csv").string(),
                        correlation_profile(nf_pairs, Axis::x,
                                            CoordCombination::difference, sr, ir),
                        hash);
    write_histogram_csv((dir / "profile_nf_diff_y.csv").string(),
                        correlation_profile(nf_pairs, Axis::y,
                                            CoordCombination::difference, sr, ir),
                        hash);

    json j = epr_to_json(out.epr);
    j["config"] = hash;
    j["tool_version"] = kToolVersion;
    write_json((dir / "epr.json").string(), j);
    return out;
}

CertificationResult run_certify(const RunConfig& cfg,
                                const std::string& out_dir) {
    fs::path dir(out_dir);
    CorrelationMatrix momentum =
        read_matrix_csv((dir / "matrix_momentum.csv").string());
    CorrelationMatrix position =
        read_matrix_csv((dir / "matrix_position.csv").string());
    CertificationResult res = certify(momentum, position);
    json j = certification_to_json(res);
    j["config"] = cfg.hash();
    j["tool_version"] = kToolVersion;
    write_json((dir / "certification.json").string(), j);
    return res;
}

TomoOutput run_tomo(const RunConfig& cfg, const std::string& out_dir) {
    TomoOutput out;
    CorrelateOutput corr = compute_correlate(cfg, out_dir);
    out.certification = certify(corr.momentum_matrix, corr.position_matrix);

    TomographyDesign design(cfg.settings());
    auto matrices = tomography_matrices(cfg, out_dir, corr.momentum_grid);
    out.maps = map_tomography(matrices, corr.momentum_grid, design,
                              cfg.pipeline.min_counts);
    out.aggregate =
        aggregate(out.maps, design, cfg.tomo.n_bootstrap, cfg.tomo.count_weighted,
                  derive_seed(cfg.seed, 0xb007), cfg.pipeline.min_counts);
    out.hyperdim = hyperdimensionality(out.certification, out.aggregate.avg_eof);

    std::string hash = cfg.hash();
    fs::path dir(out_dir);
    {
        std::ofstream csv(dir / "maps.csv", std::ios::trunc);
        csv << "# config=" << hash << "\n";
        csv << "mode,signal_cx,signal_cy,idler_cx,idler_cy,concurrence,phase,"
               "eof,intensity,counts,valid,phase_defined\n";
        csv.precision(10);
        for (const auto& c : out.maps.cells) {
            auto [sx, sy] = out.maps.grid.signal_centers[static_cast<size_t>(
                c.mode)];
            auto [ix, iy] = out.maps.grid.idler_center(c.mode);
            csv << c.mode << ',' << sx << ',' << sy << ',' << ix << ',' << iy
                << ',' << c.concurrence << ',' << c.phase << ',' << c.eof << ','
                << c.intensity << ',' << c.total_counts << ','
                << (c.valid ? 1 : 0) << ',' << (c.phase_defined ? 1 : 0) << "\n";
        }
    }
    json j;
    j["config"] = hash;
    j["tool_version"] = kToolVersion;
    j["aggregate"] = {{"avg_concurrence", out.aggregate.avg_concurrence},
                      {"err_concurrence", out.aggregate.err_concurrence},
                      {"avg_eof", out.aggregate.avg_eof},
                      {"err_eof", out.aggregate.err_eof},
                      {"valid_cells", out.aggregate.valid_cells}};
    j["certification"] = certification_to_json(out.certification);
    j["hyperdim"] = {{"spatial_dim", out.hyperdim.spatial_dim},
                     {"avg_eof", out.hyperdim.avg_eof},
                     {"total_dim", out.hyperdim.total_dim}};
    write_json((fs::path(out_dir) / "tomo.json").string(), j);
    return out;
}

Report run_report(const RunConfig& cfg, const std::string& out_dir) {
    run_centroid(cfg, out_dir);
    run_coincide(cfg, out_dir);
    CorrelateOutput corr = run_correlate(cfg, out_dir);
    run_certify(cfg, out_dir);
    TomoOutput tomo = run_tomo(cfg, out_dir);

    Report rep;
    rep.certification = tomo.certification;
    rep.aggregate = tomo.aggregate;
    rep.hyperdim = tomo.hyperdim;
    rep.epr = corr.epr;

    json j;
    j["config"] = cfg.hash();
    j["tool_version"] = kToolVersion;
    j["spatial_dim"] = rep.certification.certified_dim;
    j["f_tilde"] = rep.certification.f_tilde;
    j["avg_concurrence"] = rep.aggregate.avg_concurrence;
    j["err_concurrence"] = rep.aggregate.err_concurrence;
    j["avg_eof"] = rep.aggregate.avg_eof;
    j["err_eof"] = rep.aggregate.err_eof;
    j["total_dim"] = rep.hyperdim.total_dim;
    j["epr"] = epr_to_json(rep.epr);
    write_json((fs::path(out_dir) / "report.json").string(), j);
    return rep;
}

void run_gridscan(const RunConfig& cfg, const std::string& out_dir,
                  int max_offset_px) {
    SuperpixelGrid grid = momentum_grid_for(cfg, out_dir);
    auto pairs = read_pairs(pairs_path(out_dir, "VV", BasisPlane::far_field));
    std::ofstream csv(fs::path(out_dir) / "gridscan.csv", std::ios::trunc);
    csv << "# config=" << cfg.hash() << "\n";
    csv << "offset_x_px,offset_y_px,diagonal_fraction,total\n";
    for (int dy = -max_offset_px; dy <= max_offset_px; ++dy) {
        for (int dx = -max_offset_px; dx <= max_offset_px; ++dx) {
            SuperpixelGrid shifted = grid;
            shifted.signal_anchor_x += dx;
            shifted.signal_anchor_y += dy;
            for (auto& [cx, cy] : shifted.signal_centers) {
                cx += dx;
                cy += dy;
            }
            CorrelationMatrix m = bin_to_superpixels(pairs, shifted);
            double diag = 0;
            for (int k = 0; k < m.d; ++k) diag += static_cast<double>(m.at(k, k));
            double frac = m.total > 0 ? diag / static_cast<double>(m.total) : 0.0;
            csv << dx << ',' << dy << ',' << frac << ',' << m.total << "\n";
        }
    }
}

}  // namespace hyperent
