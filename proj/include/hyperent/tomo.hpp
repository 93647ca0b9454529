#pragma once

// Spatially resolved polarization tomography: per-superpixel-pair
// density-matrix reconstruction from 16-setting coincidence counts,
// physicality projection, entanglement maps, aggregate statistics,
// and total hyperdimensionality.

#include <array>

#include "hyperent/certify.hpp"
#include "hyperent/spatial.hpp"

namespace hyperent {

// Linear-inversion machinery for one fixed 16-setting design. Built
// once, then applied per superpixel pair.
class TomographyDesign {
  public:
    explicit TomographyDesign(const std::vector<MeasurementSetting>& settings);

    /// Linear inversion of 16 counts; Hermitian and unit-trace by
    /// construction, possibly not positive semidefinite.
    /// Normalization comes from the complete-basis settings
    /// {HH, HV, VV, VH}. Throws on zero normalization counts.
    Matrix4c reconstruct_linear(const std::array<double, 16>& counts) const;

    /// Born probabilities of all 16 settings for a given state.
    std::array<double, 16> probabilities(const DensityMatrix2Q& rho) const;

    const std::vector<MeasurementSetting>& settings() const { return settings_; }

  private:
    std::vector<MeasurementSetting> settings_;
    std::vector<Matrix4c> projectors_;
    Eigen::MatrixXd inverse_design_;     // pauli coefficients from probs
    std::array<int, 4> norm_settings_;   // indices of HH, HV, VV, VH
};

/// Nearest positive-semidefinite unit-trace matrix in Frobenius norm
/// (eigenvalue clipping with trace-preserving redistribution).
DensityMatrix2Q project_physical(const Matrix4c& rho_raw);

struct CellResult {
    int mode = -1;
    double concurrence = 0.0;
    double phase = 0.0;  // meaningful only when phase_defined
    double eof = 0.0;
    double intensity = 0.0;  // pair total / max pair total
    uint64_t total_counts = 0;
    bool valid = false;
    bool phase_defined = false;
    std::array<double, 16> counts16{};  // kept for bootstrap resampling
};

struct EntanglementMaps {
    std::vector<CellResult> cells;  // one per grid mode
    SuperpixelGrid grid;
};

/// Per-conjugate-pair tomography over the grid. Cells with fewer than
/// min_counts total coincidences are flagged invalid.
EntanglementMaps map_tomography(
    const std::vector<CorrelationMatrix>& per_setting_counts,
    const SuperpixelGrid& grid, const TomographyDesign& design,
    uint64_t min_counts = 100);

struct AggregateResult {
    double avg_concurrence = 0.0;
    double err_concurrence = 0.0;
    double avg_eof = 0.0;
    double err_eof = 0.0;
    size_t valid_cells = 0;
};

/// Count-weighted (or cell-uniform) average of C and E over valid cells;
/// errors from Poisson bootstrap of the setting counts.
AggregateResult aggregate(const EntanglementMaps& maps,
                          const TomographyDesign& design, int n_bootstrap = 100,
                          bool count_weighted = true, uint64_t seed = 12345,
                          uint64_t min_counts = 100);

struct HyperdimResult {
    int spatial_dim = 1;
    double avg_eof = 0.0;
    int total_dim = 1;  // floor(spatial_dim * 2^avg_eof)
};

HyperdimResult hyperdimensionality(const CertificationResult& spatial,
                                   double avg_eof);

struct PumpMapCell {
    int idler_mode = -1;
    double pp_x = 0.0, pp_y = 0.0;  // joint momentum p_s + p_i, rad
    double concurrence = 0.0;
    double phase = 0.0;
    uint64_t total_counts = 0;
    bool valid = false;
    bool phase_defined = false;
};

struct PumpMapResult {
    int fixed_signal_mode = -1;
    std::vector<PumpMapCell> cells;
};

/// Tomography between one fixed signal superpixel and every populated
/// idler superpixel, keyed by the joint (pump) transverse momentum.
/// Throws when fewer than 3 idler superpixels pass min_counts.
PumpMapResult pump_momentum_maps(
    const std::vector<CorrelationMatrix>& per_setting_counts,
    const SuperpixelGrid& grid, const TomographyDesign& design,
    const DetectorConfig& det, int fixed_signal_mode = -1,
    uint64_t min_counts = 100);

}  // namespace hyperent
