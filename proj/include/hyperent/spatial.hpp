#pragma once

// Superpixel binning, d x d correlation matrices in the discrete
// momentum/position bases, Gaussian correlation-width fits, and EPR
// uncertainty products.

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hyperent/pipeline.hpp"

namespace hyperent {

enum class SpatialBasis { momentum, position };
enum class Axis { x, y };
enum class CoordCombination { sum, difference };

// d conjugate superpixel pairs. Signal cells sit on a regular lattice
// (cell x cell pixels, stride pixels apart) anchored at the
// intensity-weighted ROI centroid; idler cells are the conjugates:
// point reflection about the idler anchor in the momentum basis,
// translation in the position basis.
struct SuperpixelGrid {
    int cell = 3;
    int stride = 5;
    SpatialBasis basis = SpatialBasis::momentum;
    double signal_anchor_x = 0, signal_anchor_y = 0;
    double idler_anchor_x = 0, idler_anchor_y = 0;
    // Mode m: signal cell center (pixels). Idler centers follow from the
    // conjugation map.
    std::vector<std::pair<double, double>> signal_centers;
    std::vector<std::pair<int, int>> lattice_index;     // (i, j) per mode
    std::unordered_map<long long, int> mode_of_index;   // key = pack(i, j)

    int d() const { return static_cast<int>(signal_centers.size()); }
    std::pair<double, double> idler_center(int mode) const;

    /// Mode whose signal cell contains (cx, cy), or nullopt (gutter).
    std::optional<int> signal_mode(double cx, double cy) const;
    std::optional<int> idler_mode(double cx, double cy) const;

    /// Builds the grid from the photons of one acquisition: anchors at
    /// the per-arm intensity centroids, active set = lattice cells whose
    /// center lies within radius_px of the anchor and whose 3x3 footprint
    /// stays inside the ROI (both arms).
    static SuperpixelGrid build(std::span<const CentroidedPhoton> photons,
                                const Roi& signal_roi, const Roi& idler_roi,
                                SpatialBasis basis, double radius_px,
                                int cell = 3, int stride = 5);
};

struct CorrelationMatrix {
    int d = 0;
    SpatialBasis basis = SpatialBasis::momentum;
    std::vector<uint64_t> counts;  // row-major, counts[m * d + n]
    uint64_t total = 0;
    uint64_t dropped = 0;  // pairs outside the active superpixels

    uint64_t& at(int m, int n) { return counts[static_cast<size_t>(m) * d + n]; }
    uint64_t at(int m, int n) const {
        return counts[static_cast<size_t>(m) * d + n];
    }
};

/// Increments counts[m][n] for each pair whose signal centroid lies in
/// signal cell m and idler centroid in idler cell n.
CorrelationMatrix bin_to_superpixels(std::span<const CoincidencePair> pairs,
                                     const SuperpixelGrid& grid);

struct Histogram1D {
    double origin = 0.0;     // left edge of bin 0
    double bin_width = 1.0;  // pixels
    std::vector<double> counts;

    double bin_center(size_t k) const {
        return origin + (static_cast<double>(k) + 0.5) * bin_width;
    }
};

/// Histogram (1-pixel bins) of the sum or difference of the signal and
/// idler centroid coordinates, each taken relative to its ROI center.
/// Throws std::invalid_argument on empty input.
Histogram1D correlation_profile(std::span<const CoincidencePair> pairs,
                                Axis axis, CoordCombination coords,
                                const Roi& signal_roi, const Roi& idler_roi);

struct GaussianFit {
    double amplitude = 0, mean = 0, sigma = 0, offset = 0;
    double sigma_um = 0;      // sigma converted through the pixel pitch
    double sigma_err_um = 0;  // 1-sigma fit uncertainty
    bool converged = false;
    bool subpixel = false;  // sigma below one pixel
    int iterations = 0;
};

/// Least-squares fit of A exp(-(x - mu)^2 / 2 sigma^2) + B.
/// Requires >= 5 nonzero bins; throws std::invalid_argument otherwise.
GaussianFit fit_gaussian_width(const Histogram1D& hist, double pixel_pitch_um);

struct EprResult {
    double delta_ff_x_um = 0, delta_ff_y_um = 0;  // far-field widths at sensor
    double delta_nf_x_um = 0, delta_nf_y_um = 0;  // near-field widths at sensor
    double dp_x = 0, dp_y = 0;  // conditional momentum width, hbar / um
    double dq_x = 0, dq_y = 0;  // conditional position width, um
    double product_x = 0, product_y = 0;  // units of hbar
    double product_x_err = 0, product_y_err = 0;
    bool violation_x = false, violation_y = false;  // product < 1/2
};

/// dp = (k_si / f_e) * Delta_FF, dq = Delta_NF / M, product in hbar.
EprResult epr_products(const DetectorConfig& det, const GaussianFit& ff_x,
                       const GaussianFit& ff_y, const GaussianFit& nf_x,
                       const GaussianFit& nf_y);

}  // namespace hyperent
