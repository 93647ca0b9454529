#pragma once

// Orchestration of the full chain: simulate -> centroid -> coincide ->
// correlate / certify / tomo -> report. Shared by the CLI and the
// acceptance suite so both exercise the same code path.

#include <string>

#include "hyperent/config.hpp"
#include "hyperent/tomo.hpp"

namespace hyperent {

inline constexpr const char* kToolVersion = "hyperent 0.1.0";

// File naming inside a run directory.
std::string events_path(const std::string& dir, const std::string& label,
                        BasisPlane plane);
std::string truth_path(const std::string& dir, const std::string& label,
                       BasisPlane plane);
std::string photons_path(const std::string& dir, const std::string& label,
                         BasisPlane plane);
std::string pairs_path(const std::string& dir, const std::string& label,
                       BasisPlane plane);

/// Generates one event file per far-field tomography setting plus (when
/// configured) a near-field VV acquisition, with ground-truth sidecars.
void run_simulate(const RunConfig& cfg, const std::string& out_dir,
                  bool record_truth = true, int threads = 1);

void run_centroid(const RunConfig& cfg, const std::string& out_dir);

void run_coincide(const RunConfig& cfg, const std::string& out_dir);

struct CorrelateOutput {
    SuperpixelGrid momentum_grid;
    SuperpixelGrid position_grid;
    CorrelationMatrix momentum_matrix;
    CorrelationMatrix position_matrix;
    GaussianFit ff_x, ff_y;  // far-field sum-coordinate widths
    GaussianFit nf_x, nf_y;  // near-field difference-coordinate widths
    EprResult epr;
};
CorrelateOutput run_correlate(const RunConfig& cfg, const std::string& out_dir);

CertificationResult run_certify(const RunConfig& cfg,
                                const std::string& out_dir);

struct TomoOutput {
    EntanglementMaps maps;
    AggregateResult aggregate;
    CertificationResult certification;
    HyperdimResult hyperdim;
};
TomoOutput run_tomo(const RunConfig& cfg, const std::string& out_dir);

struct Report {
    CertificationResult certification;
    AggregateResult aggregate;
    HyperdimResult hyperdim;
    EprResult epr;
};
Report run_report(const RunConfig& cfg, const std::string& out_dir);

/// Conjugate-diagonal coincidence fraction as the momentum grid is
/// displaced, exposing registration sensitivity.
void run_gridscan(const RunConfig& cfg, const std::string& out_dir,
                  int max_offset_px = 3);

}  // namespace hyperent
